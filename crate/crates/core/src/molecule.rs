//! Molecular graph: atoms as vertices, covalent bonds as edges.

use crate::elements::{self, HYDROGEN};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Chirality {
    #[default]
    None,
    /// `@`
    Anticlockwise,
    /// `@@`
    Clockwise,
}

impl Chirality {
    pub fn code(self) -> u8 {
        match self {
            Chirality::None => 0,
            Chirality::Anticlockwise => 1,
            Chirality::Clockwise => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub element: u8,
    pub formal_charge: i8,
    /// Hydrogen count written inside brackets; `None` for organic-subset atoms.
    pub explicit_h_count: Option<u8>,
    pub aromatic: bool,
    pub chirality: Chirality,
    /// 0 when unspecified.
    pub isotope: u16,
}

impl Atom {
    pub fn organic(element: u8, aromatic: bool) -> Self {
        Atom {
            element,
            formal_charge: 0,
            explicit_h_count: None,
            aromatic,
            chirality: Chirality::None,
            isotope: 0,
        }
    }

    pub fn hydrogen() -> Self {
        Atom {
            element: HYDROGEN,
            formal_charge: 0,
            explicit_h_count: Some(0),
            aromatic: false,
            chirality: Chirality::None,
            isotope: 0,
        }
    }

    pub fn is_hydrogen(&self) -> bool {
        self.element == HYDROGEN
    }

    pub fn is_bracket(&self) -> bool {
        self.explicit_h_count.is_some()
    }

    pub fn symbol(&self) -> &'static str {
        elements::symbol(self.element)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Bond order in half-units so aromatic bonds (1.5) stay integral.
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }
}

/// Directional single-bond marks (`/` and `\`). Parsed and kept, never
/// consumed downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BondStereo {
    #[default]
    None,
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
    pub stereo: BondStereo,
}

impl Bond {
    pub fn new(begin: usize, end: usize, order: BondOrder) -> Self {
        Bond {
            begin,
            end,
            order,
            stereo: BondStereo::None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    pub source_smiles: String,
    /// Set once implicit hydrogens have been turned into vertices.
    pub hydrogens_expanded: bool,
}

impl MolecularGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| !a.is_hydrogen()).count()
    }

    /// χ = |V| − |E|.
    pub fn euler_characteristic(&self) -> i64 {
        self.atoms.len() as i64 - self.bonds.len() as i64
    }

    /// Per-atom list of `(neighbor, bond index)` in bond order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for (i, b) in self.bonds.iter().enumerate() {
            adj[b.begin].push((b.end, i));
            adj[b.end].push((b.begin, i));
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.atoms.len()];
        for b in &self.bonds {
            deg[b.begin] += 1;
            deg[b.end] += 1;
        }
        deg
    }

    /// Sum of incident bond orders per atom, in half-units.
    pub fn bond_order_half_sums(&self) -> Vec<u32> {
        let mut sums = vec![0; self.atoms.len()];
        for b in &self.bonds {
            sums[b.begin] += b.order.half_units();
            sums[b.end] += b.order.half_units();
        }
        sums
    }

    /// Component label per atom, labels numbered by first appearance.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.atoms.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for b in &self.bonds {
            let (ra, rb) = (find(&mut parent, b.begin), find(&mut parent, b.end));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut label_of_root = vec![usize::MAX; self.atoms.len()];
        let mut next = 0;
        (0..self.atoms.len())
            .map(|i| {
                let r = find(&mut parent, i);
                if label_of_root[r] == usize::MAX {
                    label_of_root[r] = next;
                    next += 1;
                }
                label_of_root[r]
            })
            .collect()
    }

    /// Number of connected components (union-find).
    pub fn connected_components(&self) -> usize {
        self.component_labels().iter().max().map_or(0, |m| m + 1)
    }

    /// Number of independent cycles: edges left over after growing a BFS
    /// spanning forest.
    pub fn cycle_rank(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.atoms.len()];
        let mut tree_edges = 0;
        let mut queue = VecDeque::new();
        for root in 0..self.atoms.len() {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        tree_edges += 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        self.bonds.len() - tree_edges
    }

    /// Keeps only the component with the most heavy atoms (first on ties),
    /// preserving relative atom order.
    pub fn largest_component(&self) -> MolecularGraph {
        let labels = self.component_labels();
        let n_comp = labels.iter().max().map_or(0, |m| m + 1);
        if n_comp <= 1 {
            return self.clone();
        }
        let mut sizes = vec![0usize; n_comp];
        for (a, &l) in self.atoms.iter().zip(&labels) {
            if !a.is_hydrogen() {
                sizes[l] += 1;
            }
        }
        let mut best = 0;
        for (l, &s) in sizes.iter().enumerate() {
            if s > sizes[best] {
                best = l;
            }
        }
        let mut new_index = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if labels[i] == best {
                new_index[i] = atoms.len();
                atoms.push(a.clone());
            }
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| labels[b.begin] == best)
            .map(|b| Bond {
                begin: new_index[b.begin],
                end: new_index[b.end],
                ..*b
            })
            .collect();
        MolecularGraph {
            atoms,
            bonds,
            source_smiles: self.source_smiles.clone(),
            hydrogens_expanded: self.hydrogens_expanded,
        }
    }

    /// Relabels atoms so that old atom `i` becomes `atom_perm[i]`, and
    /// reorders bonds so old bond `j` becomes `bond_perm[j]`.
    ///
    /// Panics if either slice is not a permutation of the right length.
    pub fn relabeled(&self, atom_perm: &[usize], bond_perm: &[usize]) -> MolecularGraph {
        assert_eq!(atom_perm.len(), self.atoms.len());
        assert_eq!(bond_perm.len(), self.bonds.len());
        let mut atoms: Vec<Option<Atom>> = vec![None; self.atoms.len()];
        for (old, a) in self.atoms.iter().enumerate() {
            atoms[atom_perm[old]] = Some(a.clone());
        }
        let mut bonds: Vec<Option<Bond>> = vec![None; self.bonds.len()];
        for (old, b) in self.bonds.iter().enumerate() {
            bonds[bond_perm[old]] = Some(Bond {
                begin: atom_perm[b.begin],
                end: atom_perm[b.end],
                ..*b
            });
        }
        MolecularGraph {
            atoms: atoms.into_iter().map(|a| a.expect("atom permutation")).collect(),
            bonds: bonds.into_iter().map(|b| b.expect("bond permutation")).collect(),
            source_smiles: self.source_smiles.clone(),
            hydrogens_expanded: self.hydrogens_expanded,
        }
    }

    /// Bond list as plain index pairs, the shape consumed by the ECT.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.bonds.iter().map(|b| (b.begin, b.end)).collect()
    }
}

/// Turns implicit hydrogens into explicit degree-1 vertices.
///
/// Bracket atoms contribute their written H count. Organic-subset atoms get
/// `max(0, ⌊default_valence − Σ bond orders − |charge|⌋)`, aromatic bonds
/// counting 1.5. Hydrogens are appended after all existing atoms, grouped by
/// parent in parent order. Calling this on an expanded graph is a no-op.
pub fn add_implicit_hydrogens(graph: &MolecularGraph) -> MolecularGraph {
    if graph.hydrogens_expanded {
        return graph.clone();
    }
    let sums = graph.bond_order_half_sums();
    let mut out = graph.clone();
    for (i, atom) in graph.atoms.iter().enumerate() {
        let count = match atom.explicit_h_count {
            Some(h) => u32::from(h),
            None => elements::default_valence(atom.element)
                .map(|dv| valence_deficit(dv, sums[i], atom.formal_charge))
                .unwrap_or(0),
        };
        for _ in 0..count {
            let h = out.atoms.len();
            out.atoms.push(Atom::hydrogen());
            out.bonds.push(Bond::new(i, h, BondOrder::Single));
        }
    }
    out.hydrogens_expanded = true;
    out
}

/// `max(0, ⌊valence − half_sum/2 − |charge|⌋)` evaluated in half-units.
pub(crate) fn valence_deficit(valence: u32, half_sum: u32, charge: i8) -> u32 {
    let free = 2 * i64::from(valence) - i64::from(half_sum) - 2 * i64::from(charge.unsigned_abs());
    if free <= 0 {
        0
    } else {
        (free / 2) as u32
    }
}
