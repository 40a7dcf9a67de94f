use std::collections::VecDeque;

use super::{adjacency, combine, LigandTopology, ParameterTable};
use crate::energy::QASP;
use crate::error::TopologyError;

/// Pairs closer than this many bonds (1-2, 1-3, 1-4) are excluded.
pub const MIN_PAIR_SEPARATION: usize = 4;

/// Per-pair precomputed coefficients, AoS view of one [`NonbondPairList`] row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub i: u32,
    pub j: u32,
    /// A (12-6) or C (12-10).
    pub a12: f32,
    /// B of the r⁻⁶ term; zero for hydrogen-bond pairs.
    pub b6: f32,
    /// D of the r⁻¹⁰ term; zero for van der Waals pairs.
    pub b10: f32,
    pub hbond: bool,
    pub qq: f32,
    /// S_i·V_j + S_j·V_i + qasp·(|q_i|·V_j + |q_j|·V_i).
    pub desolv: f32,
}

/// Non-bonded ligand pairs in structure-of-arrays layout, `i < j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NonbondPairList {
    pub i: Vec<u32>,
    pub j: Vec<u32>,
    pub a12: Vec<f32>,
    pub b6: Vec<f32>,
    pub b10: Vec<f32>,
    /// 1.0 for hydrogen-bond pairs, 0.0 otherwise.
    pub hbond: Vec<f32>,
    pub qq: Vec<f32>,
    pub desolv: Vec<f32>,
}

impl NonbondPairList {
    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn push(&mut self, p: PairParams) {
        self.i.push(p.i);
        self.j.push(p.j);
        self.a12.push(p.a12);
        self.b6.push(p.b6);
        self.b10.push(p.b10);
        self.hbond.push(if p.hbond { 1.0 } else { 0.0 });
        self.qq.push(p.qq);
        self.desolv.push(p.desolv);
    }

    pub fn get(&self, k: usize) -> PairParams {
        PairParams {
            i: self.i[k],
            j: self.j[k],
            a12: self.a12[k],
            b6: self.b6[k],
            b10: self.b10[k],
            hbond: self.hbond[k] != 0.0,
            qq: self.qq[k],
            desolv: self.desolv[k],
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.i.iter().copied().zip(self.j.iter().copied())
    }
}

/// Bond-graph separation from `source` to every atom, capped at `max_depth`
/// (atoms further away, or unreachable, report `None`).
pub fn bond_separations(adj: &[Vec<usize>], source: usize, max_depth: usize) -> Vec<Option<usize>> {
    let mut depth = vec![None; adj.len()];
    depth[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = depth[u].unwrap();
        if d == max_depth {
            continue;
        }
        for &v in &adj[u] {
            if depth[v].is_none() {
                depth[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    depth
}

pub fn build_nonbond_pairlist(
    topology: &LigandTopology,
    params: &ParameterTable,
) -> Result<NonbondPairList, TopologyError> {
    let n = topology.n_atoms();
    let types = topology.type_index();
    let atom_params = types
        .iter()
        .enumerate()
        .map(|(atom, &t)| params.get(t).ok_or(TopologyError::UnknownType { atom, type_index: t }))
        .collect::<Result<Vec<_>, _>>()?;
    let bonds: Vec<(usize, usize)> = topology.bonds().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
    let adj = adjacency(n, &bonds);
    let charge = topology.charge();
    let mut list = NonbondPairList::default();
    for i in 0..n {
        let sep = bond_separations(&adj, i, MIN_PAIR_SEPARATION - 1);
        for j in (i + 1)..n {
            if sep[j].is_some() {
                continue;
            }
            let (pi, pj) = (atom_params[i], atom_params[j]);
            let c = combine(pi, pj);
            let (qi, qj) = (charge[i] as f64, charge[j] as f64);
            let desolv = pi.solpar as f64 * pj.volume as f64
                + pj.solpar as f64 * pi.volume as f64
                + QASP * (qi.abs() * pj.volume as f64 + qj.abs() * pi.volume as f64);
            let (b6, b10) = if c.hbond { (0.0, c.attractive()) } else { (c.attractive(), 0.0) };
            list.push(PairParams {
                i: i as u32,
                j: j as u32,
                a12: c.repulsive() as f32,
                b6: b6 as f32,
                b10: b10 as f32,
                hbond: c.hbond,
                qq: (qi * qj) as f32,
                desolv: desolv as f32,
            });
        }
    }
    Ok(list)
}
