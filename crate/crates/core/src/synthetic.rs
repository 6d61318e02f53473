//! Random drug-like molecules for fixtures and benchmarks, plus a small
//! SMILES writer to serialize them.
//!
//! Graphs are grown as random trees of organic-subset atoms, optionally
//! seeded with a benzene ring, then closed into extra rings and given a few
//! double bonds while respecting default valences.

use crate::elements::{self, BROMINE, CARBON, CHLORINE, FLUORINE, NITROGEN, OXYGEN, SULFUR};
use crate::molecule::{add_implicit_hydrogens, Atom, Bond, BondOrder, Chirality, MolecularGraph};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub min_heavy_atoms: usize,
    pub max_heavy_atoms: usize,
    pub max_extra_rings: usize,
    pub benzene_probability: f64,
    pub double_bond_probability: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            min_heavy_atoms: 3,
            max_heavy_atoms: 14,
            max_extra_rings: 3,
            benzene_probability: 0.3,
            double_bond_probability: 0.15,
        }
    }
}

const ELEMENT_WEIGHTS: [(u8, u32); 7] = [
    (CARBON, 62),
    (NITROGEN, 12),
    (OXYGEN, 12),
    (SULFUR, 4),
    (FLUORINE, 4),
    (CHLORINE, 4),
    (BROMINE, 2),
];

fn pick_element<R: Rng>(rng: &mut R) -> u8 {
    let total: u32 = ELEMENT_WEIGHTS.iter().map(|(_, w)| w).sum();
    let mut r = rng.gen_range(0..total);
    for &(z, w) in &ELEMENT_WEIGHTS {
        if r < w {
            return z;
        }
        r -= w;
    }
    CARBON
}

fn free_valence(g: &MolecularGraph, half_sums: &[u32], i: usize) -> u32 {
    let dv = elements::default_valence(g.atoms[i].element).unwrap_or(0);
    (2 * dv).saturating_sub(half_sums[i]) / 2
}

fn bfs_distance(g: &MolecularGraph, from: usize, to: usize) -> Option<usize> {
    let adj = g.adjacency();
    let mut dist = vec![usize::MAX; g.atom_count()];
    dist[from] = 0;
    let mut q = VecDeque::from([from]);
    while let Some(v) = q.pop_front() {
        if v == to {
            return Some(dist[v]);
        }
        for &(w, _) in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    None
}

/// One random connected heavy-atom graph (hydrogens implicit).
pub fn random_molecule<R: Rng>(rng: &mut R, cfg: &SyntheticConfig) -> MolecularGraph {
    let target = rng.gen_range(cfg.min_heavy_atoms..=cfg.max_heavy_atoms.max(cfg.min_heavy_atoms));
    let mut g = MolecularGraph::default();
    if target >= 6 && rng.gen_bool(cfg.benzene_probability) {
        for i in 0..6 {
            g.atoms.push(Atom::organic(CARBON, true));
            if i > 0 {
                g.bonds.push(Bond::new(i - 1, i, BondOrder::Aromatic));
            }
        }
        g.bonds.push(Bond::new(5, 0, BondOrder::Aromatic));
    } else {
        g.atoms.push(Atom::organic(CARBON, false));
    }

    while g.atom_count() < target {
        let sums = g.bond_order_half_sums();
        let open: Vec<usize> = (0..g.atom_count())
            .filter(|&i| free_valence(&g, &sums, i) > 0)
            .collect();
        if open.is_empty() {
            break;
        }
        let parent = open[rng.gen_range(0..open.len())];
        let idx = g.atom_count();
        g.atoms.push(Atom::organic(pick_element(rng), false));
        g.bonds.push(Bond::new(parent, idx, BondOrder::Single));
    }

    let rings = rng.gen_range(0..=cfg.max_extra_rings);
    for _ in 0..rings {
        for _attempt in 0..30 {
            let n = g.atom_count();
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b || g.atoms[a].aromatic || g.atoms[b].aromatic {
                continue;
            }
            let sums = g.bond_order_half_sums();
            if free_valence(&g, &sums, a) == 0 || free_valence(&g, &sums, b) == 0 {
                continue;
            }
            if matches!(bfs_distance(&g, a, b), Some(d) if (2..=6).contains(&d)) {
                g.bonds.push(Bond::new(a.min(b), a.max(b), BondOrder::Single));
                break;
            }
        }
    }

    for k in 0..g.bond_count() {
        let b = g.bonds[k];
        if b.order != BondOrder::Single
            || g.atoms[b.begin].aromatic
            || g.atoms[b.end].aromatic
            || !rng.gen_bool(cfg.double_bond_probability)
        {
            continue;
        }
        let sums = g.bond_order_half_sums();
        if free_valence(&g, &sums, b.begin) > 0 && free_valence(&g, &sums, b.end) > 0 {
            g.bonds[k].order = BondOrder::Double;
        }
    }
    g.source_smiles = write_smiles(&g);
    g
}

fn is_organic_subset(z: u8) -> bool {
    elements::default_valence(z).is_some()
}

fn atom_text(atom: &Atom, out: &mut String) {
    let sym = atom.symbol();
    let plain = atom.explicit_h_count.is_none()
        && atom.formal_charge == 0
        && atom.isotope == 0
        && atom.chirality == Chirality::None
        && is_organic_subset(atom.element)
        && (!atom.aromatic || matches!(sym, "B" | "C" | "N" | "O" | "P" | "S"));
    let sym = if atom.aromatic {
        sym.to_ascii_lowercase()
    } else {
        sym.to_string()
    };
    if plain {
        out.push_str(&sym);
        return;
    }
    out.push('[');
    if atom.isotope > 0 {
        let _ = write!(out, "{}", atom.isotope);
    }
    out.push_str(&sym);
    match atom.chirality {
        Chirality::None => {}
        Chirality::Anticlockwise => out.push('@'),
        Chirality::Clockwise => out.push_str("@@"),
    }
    match atom.explicit_h_count.unwrap_or(0) {
        0 => {}
        1 => out.push('H'),
        h => {
            let _ = write!(out, "H{h}");
        }
    }
    match atom.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        q if q > 0 => {
            let _ = write!(out, "+{q}");
        }
        q => {
            let _ = write!(out, "-{}", -q);
        }
    }
    out.push(']');
}

fn bond_text(g: &MolecularGraph, b: &Bond) -> &'static str {
    let both_aromatic = g.atoms[b.begin].aromatic && g.atoms[b.end].aromatic;
    match (b.order, both_aromatic) {
        (BondOrder::Single, false) | (BondOrder::Aromatic, true) => "",
        (BondOrder::Single, true) => "-",
        (BondOrder::Double, _) => "=",
        (BondOrder::Triple, _) => "#",
        (BondOrder::Aromatic, false) => ":",
    }
}

/// Serializes a graph (hydrogen-expanded or not) as SMILES. Hydrogen
/// vertices created by expansion are omitted, since parsing regenerates
/// them. Output is a valid input for [`parse_smiles`](crate::smiles::parse_smiles)
/// that reproduces the graph up to atom order.
pub fn write_smiles(graph: &MolecularGraph) -> String {
    let n = graph.atom_count();
    let skip: Vec<bool> = (0..n)
        .map(|i| graph.hydrogens_expanded && graph.atoms[i] == Atom::hydrogen())
        .collect();
    let adj = graph.adjacency();
    let mut visited = vec![false; n];
    let mut used_bond = vec![false; graph.bond_count()];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut ring_bonds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut roots = Vec::new();

    for root in 0..n {
        if visited[root] || skip[root] {
            continue;
        }
        roots.push(root);
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut slot)) = stack.last_mut() {
            if *slot == adj[v].len() {
                stack.pop();
                continue;
            }
            let (w, b) = adj[v][*slot];
            *slot += 1;
            if skip[w] || used_bond[b] {
                continue;
            }
            used_bond[b] = true;
            if visited[w] {
                ring_bonds[w].push(b);
                ring_bonds[v].push(b);
            } else {
                visited[w] = true;
                children[v].push((w, b));
                stack.push((w, 0));
            }
        }
    }

    let mut out = String::new();
    let mut digit_of_bond: Vec<Option<u32>> = vec![None; graph.bond_count()];
    let mut free_digits: Vec<bool> = vec![true; 100];
    for (k, &root) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        // (atom, incoming bond, close-paren-after)
        let mut stack: Vec<(usize, Option<usize>, bool, bool)> = vec![(root, None, false, false)];
        while let Some((v, incoming, in_branch, closing)) = stack.pop() {
            if closing {
                out.push(')');
                continue;
            }
            if in_branch {
                out.push('(');
            }
            if let Some(b) = incoming {
                out.push_str(bond_text(graph, &graph.bonds[b]));
            }
            atom_text(&graph.atoms[v], &mut out);
            for &b in &ring_bonds[v] {
                let label = match digit_of_bond[b] {
                    Some(d) => {
                        free_digits[d as usize] = true;
                        d
                    }
                    None => {
                        let d = (1..100).find(|&d| free_digits[d]).expect("ring labels") as u32;
                        free_digits[d as usize] = false;
                        digit_of_bond[b] = Some(d);
                        out.push_str(bond_text(graph, &graph.bonds[b]));
                        d
                    }
                };
                if label < 10 {
                    let _ = write!(out, "{label}");
                } else {
                    let _ = write!(out, "%{label}");
                }
            }
            let kids = &children[v];
            for (i, &(w, b)) in kids.iter().enumerate().rev() {
                let branch = i + 1 < kids.len();
                if branch {
                    stack.push((w, None, false, true));
                }
                stack.push((w, Some(b), branch, false));
            }
        }
    }
    out
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// `n` distinct random SMILES.
pub fn random_smiles_set(n: usize, seed: u64, cfg: &SyntheticConfig) -> Vec<String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = random_molecule(&mut rng, cfg).source_smiles;
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyRecord {
    pub smiles: String,
    pub cycle_rank: usize,
    pub atom_count: usize,
    pub target: f64,
}

/// Shape-driven regression fixture:
/// `target = cycle_rank + 0.1 · atom_count + N(0, noise_sigma²)`, with
/// `atom_count` counting hydrogens.
pub fn topology_dataset(n: usize, seed: u64, noise_sigma: f64) -> Vec<TopologyRecord> {
    let smiles = random_smiles_set(n, seed, &SyntheticConfig::default());
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    smiles
        .into_iter()
        .map(|s| {
            let g = crate::smiles::parse_smiles(&s).expect("generated SMILES parse");
            let h = add_implicit_hydrogens(&g);
            let cycle_rank = h.cycle_rank();
            let atom_count = h.atom_count();
            let target =
                cycle_rank as f64 + 0.1 * atom_count as f64 + noise_sigma * standard_normal(&mut rng);
            TopologyRecord {
                smiles: s,
                cycle_rank,
                atom_count,
                target,
            }
        })
        .collect()
}

/// Writes `mol_id,smiles,target` CSV text for a topology fixture.
pub fn topology_csv(records: &[TopologyRecord]) -> String {
    let mut out = String::from("mol_id,smiles,target\n");
    for (i, r) in records.iter().enumerate() {
        let _ = writeln!(out, "m{i},{},{}", r.smiles, r.target);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::{parse_smiles, parse_with_hydrogens};

    fn summary(g: &MolecularGraph) -> (usize, usize, usize, Vec<u8>, Vec<BondOrder>) {
        let mut z: Vec<u8> = g.atoms.iter().map(|a| a.element).collect();
        z.sort_unstable();
        let mut orders: Vec<BondOrder> = g.bonds.iter().map(|b| b.order).collect();
        orders.sort_by_key(|o| o.half_units());
        (g.atom_count(), g.bond_count(), g.cycle_rank(), z, orders)
    }

    #[test]
    fn writer_handles_branches_and_rings() {
        for s in ["CC(O)=O", "c1ccccc1", "C1CC1C1CC1", "CC(C)(C)C", "c1ccc2ccccc2c1", "[NH4+].[Cl-]", "[13C@@H](F)(Cl)Br", "C=1CC1"] {
            let g = parse_smiles(s).unwrap();
            let w = write_smiles(&g);
            let back = parse_smiles(&w).unwrap_or_else(|e| panic!("{s} -> {w}: {e}"));
            assert_eq!(summary(&g), summary(&back), "{s} -> {w}");
        }
    }

    #[test]
    fn writer_skips_expanded_hydrogens() {
        let h = parse_with_hydrogens("CC(O)=O").unwrap();
        assert_eq!(write_smiles(&h), "CC(O)=O");
    }

    #[test]
    fn generated_molecules_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let cfg = SyntheticConfig::default();
        for _ in 0..300 {
            let g = random_molecule(&mut rng, &cfg);
            let back = parse_smiles(&g.source_smiles).unwrap();
            assert_eq!(summary(&g), summary(&back), "{}", g.source_smiles);
            assert_eq!(back.connected_components(), 1);
        }
    }

    #[test]
    fn smiles_set_is_distinct_and_seeded() {
        let a = random_smiles_set(200, 5, &SyntheticConfig::default());
        let set: HashSet<&String> = a.iter().collect();
        assert_eq!(set.len(), 200);
        assert_eq!(a, random_smiles_set(200, 5, &SyntheticConfig::default()));
    }

    #[test]
    fn topology_targets_follow_formula() {
        let recs = topology_dataset(50, 3, 0.0);
        for r in &recs {
            assert_eq!(r.target, r.cycle_rank as f64 + 0.1 * r.atom_count as f64);
        }
        assert!(recs.iter().any(|r| r.cycle_rank > 0));
        assert!(topology_csv(&recs).starts_with("mol_id,smiles,target\nm0,"));
    }
}
