//! SMILES reader for the subset used by drug-like datasets.
//!
//! Supported: organic-subset atoms (`B C N O P S F Cl Br I`, aromatic
//! `b c n o p s`), bracket atoms with isotope, chirality (`@`, `@@`),
//! hydrogen count, charge and atom class, branches, ring closures (`0-9`
//! and `%nn`), bond symbols `- = # : / \`, and `.`-separated components.
//! Wildcards and reaction SMILES are rejected.
//!
//! The returned graph holds the written atoms only; call
//! [`add_implicit_hydrogens`](crate::molecule::add_implicit_hydrogens) to
//! materialize hydrogens.

use crate::elements::{self, BORON, BROMINE, CARBON, CHLORINE, FLUORINE, IODINE, NITROGEN};
use crate::elements::{OXYGEN, PHOSPHORUS, SULFUR};
use crate::molecule::{Atom, Bond, BondOrder, BondStereo, Chirality, MolecularGraph};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("EmptyInput: SMILES string is empty")]
    EmptyInput,
    #[error("UnknownToken: unexpected {token:?} at position {position}")]
    UnknownToken { position: usize, token: String },
    #[error("UnbalancedParenthesis: unmatched parenthesis at position {position}")]
    UnbalancedParenthesis { position: usize },
    #[error("UnmatchedRingClosure: ring bond {label} opened at position {position} is never closed")]
    UnmatchedRingClosure { label: u32, position: usize },
    #[error("RingBondConflict: ring bond {label} closed at position {position} with a different bond symbol")]
    RingBondConflict { label: u32, position: usize },
    #[error("DuplicateBond: atoms {first} and {second} bonded twice (position {position})")]
    DuplicateBond {
        position: usize,
        first: usize,
        second: usize,
    },
    #[error("ValenceExceeded: atom {atom} ({symbol}) has {valence} explicit bonds, maximum {max}")]
    ValenceExceeded {
        atom: usize,
        symbol: &'static str,
        valence: u32,
        max: u32,
    },
}

impl SmilesError {
    /// Variant name, stable for reporting.
    pub fn name(&self) -> &'static str {
        match self {
            SmilesError::EmptyInput => "EmptyInput",
            SmilesError::UnknownToken { .. } => "UnknownToken",
            SmilesError::UnbalancedParenthesis { .. } => "UnbalancedParenthesis",
            SmilesError::UnmatchedRingClosure { .. } => "UnmatchedRingClosure",
            SmilesError::RingBondConflict { .. } => "RingBondConflict",
            SmilesError::DuplicateBond { .. } => "DuplicateBond",
            SmilesError::ValenceExceeded { .. } => "ValenceExceeded",
        }
    }
}

/// Parses `input` into a graph of its written atoms.
pub fn parse_smiles(input: &str) -> Result<MolecularGraph, SmilesError> {
    if input.is_empty() {
        return Err(SmilesError::EmptyInput);
    }
    Parser::new(input).run()
}

/// Parses and expands hydrogens in one step.
pub fn parse_with_hydrogens(input: &str) -> Result<MolecularGraph, SmilesError> {
    parse_smiles(input).map(|g| crate::molecule::add_implicit_hydrogens(&g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Last {
    Start,
    Atom,
    Bond,
    Open,
    Close,
    Ring,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PendingBond {
    order: BondOrder,
    stereo: BondStereo,
}

struct OpenRing {
    atom: usize,
    bond: Option<PendingBond>,
    position: usize,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    bonded: HashSet<(usize, usize)>,
    branches: Vec<(usize, usize)>,
    prev: Option<usize>,
    pending: Option<PendingBond>,
    rings: HashMap<u32, OpenRing>,
    last: Last,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            atoms: Vec::new(),
            bonds: Vec::new(),
            bonded: HashSet::new(),
            branches: Vec::new(),
            prev: None,
            pending: None,
            rings: HashMap::new(),
            last: Last::Start,
        }
    }

    fn unknown(&self, position: usize) -> SmilesError {
        let token = self.text[position..]
            .chars()
            .next()
            .map_or_else(|| "end of input".to_string(), |c| c.to_string());
        SmilesError::UnknownToken { position, token }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn run(mut self) -> Result<MolecularGraph, SmilesError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if self.prev.is_none() || self.pending.is_some() {
                        return Err(self.unknown(start));
                    }
                    self.branches.push((self.prev.unwrap(), start));
                    self.pos += 1;
                    self.last = Last::Open;
                }
                b')' => {
                    let Some((anchor, _)) = self.branches.pop() else {
                        return Err(SmilesError::UnbalancedParenthesis { position: start });
                    };
                    if self.pending.is_some() || matches!(self.last, Last::Open | Last::Dot) {
                        return Err(self.unknown(start));
                    }
                    self.prev = Some(anchor);
                    self.pos += 1;
                    self.last = Last::Close;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.prev.is_none() || self.pending.is_some() {
                        return Err(self.unknown(start));
                    }
                    let (order, stereo) = match c {
                        b'-' => (BondOrder::Single, BondStereo::None),
                        b'=' => (BondOrder::Double, BondStereo::None),
                        b'#' => (BondOrder::Triple, BondStereo::None),
                        b':' => (BondOrder::Aromatic, BondStereo::None),
                        b'/' => (BondOrder::Single, BondStereo::Up),
                        _ => (BondOrder::Single, BondStereo::Down),
                    };
                    self.pending = Some(PendingBond { order, stereo });
                    self.pos += 1;
                    self.last = Last::Bond;
                }
                b'.' => {
                    if self.prev.is_none() || self.pending.is_some() {
                        return Err(self.unknown(start));
                    }
                    self.prev = None;
                    self.pos += 1;
                    self.last = Last::Dot;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.push_atom(atom, start)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.push_atom(atom, start)?;
                }
            }
        }
        let end = self.bytes.len();
        if self.pending.is_some() || self.last == Last::Dot {
            return Err(self.unknown(end));
        }
        if let Some(&(_, position)) = self.branches.first() {
            return Err(SmilesError::UnbalancedParenthesis { position });
        }
        if let Some((&label, ring)) = self.rings.iter().min_by_key(|(_, r)| r.position) {
            return Err(SmilesError::UnmatchedRingClosure {
                label,
                position: ring.position,
            });
        }
        let graph = MolecularGraph {
            atoms: self.atoms,
            bonds: self.bonds,
            source_smiles: self.text.to_string(),
            hydrogens_expanded: false,
        };
        check_valence(&graph)?;
        Ok(graph)
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn add_bond(
        &mut self,
        a: usize,
        b: usize,
        bond: Option<PendingBond>,
        position: usize,
    ) -> Result<(), SmilesError> {
        let key = (a.min(b), a.max(b));
        if a == b || !self.bonded.insert(key) {
            return Err(SmilesError::DuplicateBond {
                position,
                first: key.0,
                second: key.1,
            });
        }
        let (order, stereo) = match bond {
            Some(p) => (p.order, p.stereo),
            None => (self.default_order(a, b), BondStereo::None),
        };
        self.bonds.push(Bond {
            begin: a,
            end: b,
            order,
            stereo,
        });
        Ok(())
    }

    fn push_atom(&mut self, atom: Atom, position: usize) -> Result<(), SmilesError> {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(p) = self.prev {
            let bond = self.pending.take();
            self.add_bond(p, idx, bond, position)?;
        }
        self.prev = Some(idx);
        self.last = Last::Atom;
        Ok(())
    }

    fn ring_closure(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        let Some(current) = self.prev else {
            return Err(self.unknown(start));
        };
        let label = if self.bytes[start] == b'%' {
            match (self.bytes.get(start + 1), self.bytes.get(start + 2)) {
                (Some(d1 @ b'0'..=b'9'), Some(d2 @ b'0'..=b'9')) => {
                    self.pos += 3;
                    u32::from(d1 - b'0') * 10 + u32::from(d2 - b'0')
                }
                _ => return Err(self.unknown(start)),
            }
        } else {
            self.pos += 1;
            u32::from(self.bytes[start] - b'0')
        };
        let here = self.pending.take();
        match self.rings.remove(&label) {
            Some(open) => {
                let bond = match (open.bond, here) {
                    (Some(a), Some(b)) if a.order != b.order => {
                        return Err(SmilesError::RingBondConflict {
                            label,
                            position: start,
                        })
                    }
                    (Some(a), _) => Some(a),
                    (None, b) => b,
                };
                self.add_bond(open.atom, current, bond, start)?;
            }
            None => {
                self.rings.insert(
                    label,
                    OpenRing {
                        atom: current,
                        bond: here,
                        position: start,
                    },
                );
            }
        }
        self.last = Last::Ring;
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        let two = self.bytes.get(start..start + 2);
        let (element, aromatic, len) = match two {
            Some(b"Cl") => (CHLORINE, false, 2),
            Some(b"Br") => (BROMINE, false, 2),
            _ => match self.bytes[start] {
                b'B' => (BORON, false, 1),
                b'C' => (CARBON, false, 1),
                b'N' => (NITROGEN, false, 1),
                b'O' => (OXYGEN, false, 1),
                b'P' => (PHOSPHORUS, false, 1),
                b'S' => (SULFUR, false, 1),
                b'F' => (FLUORINE, false, 1),
                b'I' => (IODINE, false, 1),
                b'b' => (BORON, true, 1),
                b'c' => (CARBON, true, 1),
                b'n' => (NITROGEN, true, 1),
                b'o' => (OXYGEN, true, 1),
                b'p' => (PHOSPHORUS, true, 1),
                b's' => (SULFUR, true, 1),
                _ => return Err(self.unknown(start)),
            },
        };
        self.pos += len;
        Ok(Atom::organic(element, aromatic))
    }

    fn digits(&mut self, max_len: usize) -> Option<u32> {
        let start = self.pos;
        while self.pos - start < max_len && matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.text[start..self.pos].parse().unwrap())
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        self.pos += 1; // '['
        let isotope = self.digits(3).unwrap_or(0) as u16;

        let sym_start = self.pos;
        let (element, aromatic) = match self.peek() {
            Some(c @ (b'b' | b'c' | b'n' | b'o' | b'p' | b's')) => {
                self.pos += 1;
                let upper = (c.to_ascii_uppercase() as char).to_string();
                (elements::atomic_number(&upper).unwrap(), true)
            }
            Some(b'A'..=b'Z') => {
                let two = self
                    .text
                    .get(sym_start..sym_start + 2)
                    .filter(|s| s.as_bytes()[1].is_ascii_lowercase())
                    .and_then(elements::atomic_number);
                if let Some(z) = two {
                    self.pos += 2;
                    (z, false)
                } else {
                    let z = elements::atomic_number(&self.text[sym_start..sym_start + 1])
                        .ok_or_else(|| self.unknown(sym_start))?;
                    self.pos += 1;
                    (z, false)
                }
            }
            _ => return Err(self.unknown(sym_start)),
        };

        let mut chirality = Chirality::None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            chirality = Chirality::Anticlockwise;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                chirality = Chirality::Clockwise;
            }
        }

        let mut h_count = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            h_count = self.digits(1).unwrap_or(1) as u8;
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.digits(2) {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
            if charge.abs() > 15 {
                return Err(self.unknown(self.pos - 1));
            }
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.digits(4).is_none() {
                return Err(self.unknown(self.pos));
            }
        }

        if self.peek() != Some(b']') {
            return Err(self.unknown(self.pos.min(self.bytes.len())));
        }
        self.pos += 1;

        Ok(Atom {
            element,
            formal_charge: charge as i8,
            explicit_h_count: Some(h_count),
            aromatic,
            chirality,
            isotope,
        })
    }
}

fn check_valence(graph: &MolecularGraph) -> Result<(), SmilesError> {
    let sums = graph.bond_order_half_sums();
    for (i, atom) in graph.atoms.iter().enumerate() {
        let Some(max) = elements::max_valence(atom.element) else {
            continue;
        };
        let max = max + u32::from(atom.formal_charge.unsigned_abs());
        let valence = sums[i] / 2 + u32::from(atom.explicit_h_count.unwrap_or(0));
        if valence > max {
            return Err(SmilesError::ValenceExceeded {
                atom: i,
                symbol: atom.symbol(),
                valence,
                max,
            });
        }
    }
    Ok(())
}
