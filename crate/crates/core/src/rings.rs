//! Ring membership from bridge detection: a bond lies on a ring iff it is
//! not a bridge.

use crate::molecule::MolecularGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMembership {
    pub atom_in_ring: Vec<bool>,
    pub bond_in_ring: Vec<bool>,
}

/// Finds bridges with one iterative low-link DFS over `n` vertices.
/// Returns a flag per edge, `true` when the edge is a bridge.
pub fn bridges(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut is_bridge = vec![false; edges.len()];
    let mut order = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    // (vertex, edge used to enter it, next adjacency slot)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();

    for root in 0..n {
        if order[root] != usize::MAX {
            continue;
        }
        order[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(top) = stack.last_mut() {
            let (v, via, slot) = *top;
            if slot < adj[v].len() {
                top.2 += 1;
                let (w, e) = adj[v][slot];
                if e == via {
                    continue;
                }
                if order[w] == usize::MAX {
                    order[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, e, 0));
                } else {
                    low[v] = low[v].min(order[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > order[parent] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

pub fn ring_membership(graph: &MolecularGraph) -> RingMembership {
    let edges = graph.edge_list();
    let bridge = bridges(graph.atom_count(), &edges);
    let bond_in_ring: Vec<bool> = bridge.iter().map(|b| !b).collect();
    let mut atom_in_ring = vec![false; graph.atom_count()];
    for (&(a, b), &ring) in edges.iter().zip(&bond_in_ring) {
        if ring {
            atom_in_ring[a] = true;
            atom_in_ring[b] = true;
        }
    }
    RingMembership {
        atom_in_ring,
        bond_in_ring,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Edge `e` lies on a cycle iff its endpoints stay connected once `e`
    /// is removed.
    fn brute_force_on_cycle(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
        (0..edges.len())
            .map(|skip| {
                let (src, dst) = edges[skip];
                let mut seen = vec![false; n];
                let mut stack = vec![src];
                seen[src] = true;
                while let Some(v) = stack.pop() {
                    for (i, &(a, b)) in edges.iter().enumerate() {
                        if i == skip {
                            continue;
                        }
                        let w = if a == v {
                            b
                        } else if b == v {
                            a
                        } else {
                            continue;
                        };
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
                seen[dst]
            })
            .collect()
    }

    #[test]
    fn path_has_no_rings() {
        let b = bridges(3, &[(0, 1), (1, 2)]);
        assert_eq!(b, vec![true, true]);
    }

    #[test]
    fn triangle_is_all_ring() {
        let b = bridges(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(b, vec![false, false, false]);
    }

    #[test]
    fn two_triangles_joined_by_bridge() {
        let edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)];
        let b = bridges(6, &edges);
        let oracle: Vec<bool> = brute_force_on_cycle(6, &edges).iter().map(|c| !c).collect();
        assert_eq!(b, oracle);
        assert_eq!(b, vec![false, false, false, true, false, false, false]);
    }

    #[test]
    fn ring_membership_on_parsed_molecule() {
        let g = crate::smiles::parse_with_hydrogens("C1CC1C1CC1").unwrap();
        let rm = ring_membership(&g);
        assert!(rm.atom_in_ring[..6].iter().all(|&r| r));
        assert!(rm.atom_in_ring[6..].iter().all(|&r| !r));
        let ring_bonds = rm.bond_in_ring.iter().filter(|&&r| r).count();
        assert_eq!(ring_bonds, 6);
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 1usize..12, raw in prop::collection::vec((0usize..12, 0usize..12), 0..24)) {
            let mut edges = Vec::new();
            for (a, b) in raw {
                let (a, b) = (a % n, b % n);
                if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            let oracle: Vec<bool> = brute_force_on_cycle(n, &edges).iter().map(|c| !c).collect();
            prop_assert_eq!(bridges(n, &edges), oracle);
        }
    }
}
