//! The big, little and enhanced `l`-isogeny graphs of a class set, as graphs
//! with opposites, half-edges and weights in Kurihara's sense.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::json;

use crate::brandt::expected_row_sum;
use crate::error::{consistency, Error, Result};
use crate::hermitian::lattice::{dual_embedding, find_isometry, Embedding};
use crate::hermitian::neighbors::{embedding_key, neighbor_from_key, neighbor_keys, NeighborContext};
use crate::hermitian::PolarizedClassSet;
use crate::lattice::intlin::rref_mod;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub origin: usize,
    pub terminus: usize,
    pub opposite: Option<usize>,
    pub weight: u64,
    pub length: u64,
}

impl Edge {
    pub fn is_half_edge(&self, index: usize) -> bool {
        self.opposite == Some(index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    pub vertex_weights: Vec<u64>,
    pub edges: Vec<Edge>,
    pub has_opposites: bool,
    pub allows_half_edges: bool,
}

impl WeightedGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_weights.len()
    }

    /// `Ad_ij = #{e : o(e) = i, t(e) = j}`.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let h = self.vertex_count();
        let mut a = vec![vec![0u64; h]; h];
        for e in &self.edges {
            a[e.origin][e.terminus] += 1;
        }
        a
    }

    /// `Adw_ij = sum_{o(e) = i, t(e) = j} w(o(e)) / w(e)`.
    pub fn weighted_adjacency(&self) -> Vec<Vec<Rational>> {
        let h = self.vertex_count();
        let mut a = vec![vec![Rational::zero(); h]; h];
        for e in &self.edges {
            a[e.origin][e.terminus] +=
                Rational::new(BigInt::from(self.vertex_weights[e.origin]), BigInt::from(e.weight));
        }
        a
    }

    pub fn half_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&k| self.edges[k].is_half_edge(k)).collect()
    }

    /// Checks `opp(opp(e)) = e`, `o(opp e) = t(e)`, `w(opp e) = w(e)`, `f(opp e) = f(e)`
    /// and `w(e) | w(o(e))`.
    pub fn check_axioms(&self) -> Result<()> {
        let h = self.vertex_count();
        for (k, e) in self.edges.iter().enumerate() {
            if e.origin >= h || e.terminus >= h {
                return consistency(format!("edge {k} has an endpoint outside the vertex set"));
            }
            if e.weight == 0 || self.vertex_weights[e.origin] % e.weight != 0 {
                return consistency(format!("weight of edge {k} does not divide the weight of its origin"));
            }
            match e.opposite {
                None if self.has_opposites => return consistency(format!("edge {k} has no opposite")),
                None => {}
                Some(_) if !self.has_opposites => {
                    return consistency(format!("edge {k} has an opposite in a graph without opposites"))
                }
                Some(o) => {
                    let oe = self.edges.get(o).ok_or_else(|| Error::Consistency(format!("edge {k}: bad opposite")))?;
                    if oe.opposite != Some(k) {
                        return consistency(format!("opposite of edge {k} is not an involution"));
                    }
                    if oe.origin != e.terminus || oe.terminus != e.origin {
                        return consistency(format!("edge {k} and its opposite have mismatched endpoints"));
                    }
                    if oe.weight != e.weight || oe.length != e.length {
                        return consistency(format!("edge {k} and its opposite have different weights"));
                    }
                    if o == k && !self.allows_half_edges {
                        return consistency(format!("edge {k} is a half-edge in a graph without half-edges"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Reachability with edges taken in both directions.
    pub fn is_connected(&self) -> bool {
        let h = self.vertex_count();
        if h == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); h];
        for e in &self.edges {
            adj[e.origin].push(e.terminus);
            adj[e.terminus].push(e.origin);
        }
        let mut seen = vec![false; h];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| {
                json!({
                    "origin": e.origin.to_string(),
                    "terminus": e.terminus.to_string(),
                    "opposite": e.opposite.map(|o| o.to_string()),
                    "half_edge": e.is_half_edge(k),
                    "weight": e.weight.to_string(),
                    "length": e.length.to_string(),
                })
            })
            .collect();
        json!({
            "vertices": self.vertex_weights.iter().map(u64::to_string).collect::<Vec<_>>(),
            "has_opposites": self.has_opposites,
            "allows_half_edges": self.allows_half_edges,
            "edges": edges,
        })
    }

    /// Graphviz output. Opposite pairs are drawn once; half-edges are dashed loops.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let (kind, arrow) = if self.has_opposites { ("graph", "--") } else { ("digraph", "->") };
        let _ = writeln!(out, "{kind} {name} {{");
        for (i, w) in self.vertex_weights.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"v{i} (e={w})\"];");
        }
        for (k, e) in self.edges.iter().enumerate() {
            match e.opposite {
                Some(o) if o == k => {
                    let _ = writeln!(
                        out,
                        "  v{} {arrow} v{} [label=\"w={} f={}\", style=dashed, half_edge=true];",
                        e.origin, e.terminus, e.weight, e.length
                    );
                }
                Some(o) if o < k => {}
                _ => {
                    let _ = writeln!(
                        out,
                        "  v{} {arrow} v{} [label=\"w={} f={}\"];",
                        e.origin, e.terminus, e.weight, e.length
                    );
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Removes every half-edge, renumbering the remaining opposites.
pub fn strip_half_edges(g: &WeightedGraph) -> WeightedGraph {
    let keep: Vec<usize> = (0..g.edges.len()).filter(|&k| !g.edges[k].is_half_edge(k)).collect();
    let new_index: HashMap<usize, usize> = keep.iter().enumerate().map(|(n, &k)| (k, n)).collect();
    let edges = keep
        .iter()
        .map(|&k| {
            let e = &g.edges[k];
            Edge { opposite: e.opposite.map(|o| new_index[&o]), ..e.clone() }
        })
        .collect();
    WeightedGraph { edges, ..g.clone() }
}

/// The `l`-neighbors of one class, grouped into orbits of its automorphism group.
#[derive(Clone, Debug)]
struct VertexData {
    keys: Vec<Vec<Vec<i64>>>,
    key_index: HashMap<Vec<Vec<i64>>, usize>,
    // orbit id of each key; orbits are numbered by their smallest key index
    orbit_of: Vec<usize>,
    // representative key index and size of each orbit
    orbits: Vec<(usize, usize)>,
    // target class of each orbit
    target: Vec<usize>,
}

fn act_on_key(alpha: &Embedding, key: &[Vec<i64>], ell: i64) -> Vec<Vec<i64>> {
    let rows: Vec<Vec<i64>> = key.iter().map(|r| alpha.apply(r)).collect();
    rref_mod(&rows, ell)
}

fn vertex_data(set: &PolarizedClassSet, ctx: &NeighborContext, i: usize) -> Result<VertexData> {
    let class = &set.classes()[i];
    let lat = class.lattice();
    let ell = ctx.ell();
    let keys = neighbor_keys(ctx, lat)?;
    let key_index: HashMap<Vec<Vec<i64>>, usize> = keys.iter().cloned().enumerate().map(|(k, v)| (v, k)).collect();
    if key_index.len() != keys.len() {
        return consistency("duplicate neighbor keys");
    }
    let autos = class.automorphisms();
    let mut orbit_of = vec![usize::MAX; keys.len()];
    let mut orbits = Vec::new();
    for k in 0..keys.len() {
        if orbit_of[k] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut size = 0;
        for alpha in autos {
            let img = act_on_key(alpha, &keys[k], ell);
            let m = *key_index
                .get(&img)
                .ok_or_else(|| Error::Consistency("automorphism maps a neighbor outside the neighbor set".into()))?;
            if orbit_of[m] == usize::MAX {
                orbit_of[m] = id;
                size += 1;
            } else if orbit_of[m] != id {
                return consistency("automorphism orbits overlap");
            }
        }
        orbits.push((k, size));
    }
    let mut target = Vec::with_capacity(orbits.len());
    for &(k, _) in &orbits {
        let nb = neighbor_from_key(lat, &keys[k], ell)?;
        let j = set.identify(&nb).ok_or_else(|| Error::Consistency("neighbor lies in no known class".into()))?;
        target.push(j);
    }
    Ok(VertexData { keys, key_index, orbit_of, orbits, target })
}

/// `phi: L_j -> L_i` of multiplier `l` whose image is the neighbor with the given key.
fn isogeny_for_key(set: &PolarizedClassSet, i: usize, j: usize, key: &[Vec<i64>], ell: i64) -> Result<Embedding> {
    let li = set.classes()[i].lattice();
    let lj = set.classes()[j].lattice();
    let nb = neighbor_from_key(li, key, ell)?;
    let iso = find_isometry(lj, &nb).ok_or_else(|| Error::Consistency("neighbor is not isometric to its class".into()))?;
    let image = iso
        .image
        .iter()
        .map(|y| {
            li.basis()
                .coords(&nb.ambient(y))
                .ok_or_else(|| Error::Consistency("neighbor is not contained in its parent lattice".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Embedding { image })
}

fn check_prime(set: &PolarizedClassSet, ell: u64) -> Result<NeighborContext> {
    if !crate::arith::is_prime(ell) || ell == set.p() {
        return Err(Error::InvalidParameter(format!("l = {ell} must be a prime different from p")));
    }
    NeighborContext::new(set.order(), ell)
}

fn all_vertex_data(set: &PolarizedClassSet, ctx: &NeighborContext) -> Result<Vec<VertexData>> {
    (0..set.h()).into_par_iter().map(|i| vertex_data(set, ctx, i)).collect()
}

/// `Gr_g(l, p)`: one directed edge per neighbor, no opposites.
pub fn build_big(set: &PolarizedClassSet, ell: u64) -> Result<WeightedGraph> {
    let ctx = check_prime(set, ell)?;
    let data = all_vertex_data(set, &ctx)?;
    let mut edges = Vec::new();
    for (i, d) in data.iter().enumerate() {
        for k in 0..d.keys.len() {
            let terminus = d.target[d.orbit_of[k]];
            edges.push(Edge { origin: i, terminus, opposite: None, weight: 1, length: 1 });
        }
    }
    let g = WeightedGraph { vertex_weights: set.aut_counts(), edges, has_opposites: false, allows_half_edges: false };
    g.check_axioms()?;
    let want = expected_row_sum(ell, set.g());
    if g.adjacency().iter().any(|r| r.iter().sum::<u64>() != want) {
        return consistency("big graph is not regular of the expected degree");
    }
    Ok(g)
}

/// `gr_g(l, p)`: one edge per automorphism orbit of neighbors, paired with
/// the orbit of the dual isogeny, weighted by the stabilizer order.
pub fn build_little(set: &PolarizedClassSet, ell: u64) -> Result<WeightedGraph> {
    let ctx = check_prime(set, ell)?;
    let l = ell as i64;
    let data = all_vertex_data(set, &ctx)?;
    let e = set.aut_counts();
    let mut offset = Vec::with_capacity(data.len());
    let mut total = 0;
    for d in &data {
        offset.push(total);
        total += d.orbits.len();
    }
    let slots: Vec<(usize, usize)> =
        data.iter().enumerate().flat_map(|(i, d)| (0..d.orbits.len()).map(move |o| (i, o))).collect();
    let edges = slots
        .par_iter()
        .map(|&(i, o)| -> Result<Edge> {
            let d = &data[i];
            let (k, size) = d.orbits[o];
            let j = d.target[o];
            let phi = isogeny_for_key(set, i, j, &d.keys[k], l)?;
            let li = set.classes()[i].lattice();
            let lj = set.classes()[j].lattice();
            let psi = dual_embedding(lj, li, &phi, l)?;
            let dual_key = embedding_key(&psi, l);
            let dj = &data[j];
            let m = *dj
                .key_index
                .get(&dual_key)
                .ok_or_else(|| Error::Consistency("dual isogeny is not a neighbor".into()))?;
            let weight = e[i] / size as u64;
            if weight * size as u64 != e[i] {
                return consistency("orbit size does not divide the automorphism count");
            }
            Ok(Edge { origin: i, terminus: j, opposite: Some(offset[j] + dj.orbit_of[m]), weight, length: weight })
        })
        .collect::<Result<Vec<_>>>()?;
    let g = WeightedGraph { vertex_weights: e, edges, has_opposites: true, allows_half_edges: true };
    g.check_axioms()?;
    Ok(g)
}

/// `gr~_g(l, p)` with its involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnhancedGraph {
    pub graph: WeightedGraph,
    /// Number of classes; vertices `0..h` have type 0 and `h..2h` type g.
    pub h: usize,
    pub iota_vertex: Vec<usize>,
    pub iota_edge: Vec<usize>,
}

/// The bipartite double cover of a little graph: each edge `e: u -> v`
/// gives `u -> h + v` and `h + u -> v`, with `opp` exchanging the two layers.
pub fn build_enhanced(little: &WeightedGraph) -> Result<EnhancedGraph> {
    let h = little.vertex_count();
    let m = little.edges.len();
    let mut edges = Vec::with_capacity(2 * m);
    for layer in 0..2 {
        for e in &little.edges {
            let opp = e.opposite.ok_or_else(|| Error::InvalidParameter("little graph must have opposites".into()))?;
            let (origin, terminus) = if layer == 0 { (e.origin, h + e.terminus) } else { (h + e.origin, e.terminus) };
            edges.push(Edge {
                origin,
                terminus,
                opposite: Some((1 - layer) * m + opp),
                weight: e.weight,
                length: e.length,
            });
        }
    }
    let mut vertex_weights = little.vertex_weights.clone();
    vertex_weights.extend_from_slice(&little.vertex_weights);
    let graph = WeightedGraph { vertex_weights, edges, has_opposites: true, allows_half_edges: false };
    graph.check_axioms()?;
    let iota_vertex = (0..2 * h).map(|v| (v + h) % (2 * h)).collect();
    let iota_edge = (0..2 * m).map(|k| (k + m) % (2 * m)).collect();
    Ok(EnhancedGraph { graph, h, iota_vertex, iota_edge })
}

impl EnhancedGraph {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.graph.to_json();
        v["iota_vertex"] = json!(self.iota_vertex.iter().map(usize::to_string).collect::<Vec<_>>());
        v["iota_edge"] = json!(self.iota_edge.iter().map(usize::to_string).collect::<Vec<_>>());
        v
    }

    /// Bipartite, no half-edges, `iota` a fixed-point-free involution
    /// compatible with `o`, `t`, `opp` and the weights.
    pub fn check_structure(&self) -> Result<()> {
        let g = &self.graph;
        let h = self.h;
        if g.vertex_count() != 2 * h {
            return consistency("enhanced graph must have 2h vertices");
        }
        if !g.half_edges().is_empty() {
            return consistency("enhanced graph has half-edges");
        }
        for e in &g.edges {
            if (e.origin < h) == (e.terminus < h) {
                return consistency("enhanced graph is not bipartite");
            }
        }
        for v in 0..2 * h {
            let w = self.iota_vertex[v];
            if w == v || self.iota_vertex[w] != v || g.vertex_weights[w] != g.vertex_weights[v] {
                return consistency("iota is not a fixed-point-free involution on vertices");
            }
        }
        for (k, e) in g.edges.iter().enumerate() {
            let m = self.iota_edge[k];
            let f = &g.edges[m];
            if m == k || self.iota_edge[m] != k {
                return consistency("iota is not a fixed-point-free involution on edges");
            }
            if f.origin != self.iota_vertex[e.origin] || f.terminus != self.iota_vertex[e.terminus] {
                return consistency("iota does not commute with origin and terminus");
            }
            if f.weight != e.weight || f.opposite != e.opposite.map(|o| self.iota_edge[o]) {
                return consistency("iota does not commute with opposites");
            }
        }
        Ok(())
    }

    /// The quotient by `iota`: vertex `v` and `v + h` become `v`, edge `k`
    /// and `iota(k)` become the edge with the smaller index.
    pub fn quotient(&self) -> WeightedGraph {
        let g = &self.graph;
        let m = g.edges.len() / 2;
        let rep = |k: usize| k.min(self.iota_edge[k]);
        let edges = (0..m)
            .map(|k| {
                let e = &g.edges[rep(k)];
                Edge {
                    origin: e.origin % self.h,
                    terminus: e.terminus % self.h,
                    opposite: e.opposite.map(rep),
                    weight: e.weight,
                    length: e.length,
                }
            })
            .collect();
        WeightedGraph {
            vertex_weights: g.vertex_weights[..self.h].to_vec(),
            edges,
            has_opposites: true,
            allows_half_edges: true,
        }
    }

    /// Checks that `v -> v mod h`, `k -> k mod m` is a covering map onto `little`
    /// whose fibres are the `iota`-orbits.
    pub fn verify_double_cover(&self, little: &WeightedGraph) -> Result<()> {
        let g = &self.graph;
        let h = self.h;
        let m = little.edges.len();
        if g.edges.len() != 2 * m || little.vertex_count() != h {
            return consistency("double cover has the wrong size");
        }
        for (k, e) in g.edges.iter().enumerate() {
            let d = &little.edges[k % m];
            if e.origin % h != d.origin || e.terminus % h != d.terminus || e.weight != d.weight {
                return consistency("covering map does not respect endpoints or weights");
            }
            if e.opposite.map(|o| o % m) != d.opposite {
                return consistency("covering map does not respect opposites");
            }
            if self.iota_edge[k] % m != k % m {
                return consistency("iota orbits are not the fibres of the covering");
            }
        }
        // local bijectivity: edges out of each vertex map bijectively onto edges out of its image
        for v in 0..2 * h {
            let mut images: Vec<usize> =
                g.edges.iter().enumerate().filter(|(_, e)| e.origin == v).map(|(k, _)| k % m).collect();
            images.sort_unstable();
            let want: Vec<usize> = (0..m).filter(|&k| little.edges[k].origin == v % h).collect();
            if images != want {
                return consistency("covering map is not a local bijection");
            }
        }
        if self.quotient() != *little {
            return consistency("quotient by iota differs from the little graph");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(o: usize, t: usize, opp: Option<usize>, w: u64) -> Edge {
        Edge { origin: o, terminus: t, opposite: opp, weight: w, length: w }
    }

    #[test]
    fn two_components_are_disconnected() {
        let g = WeightedGraph {
            vertex_weights: vec![2, 2, 2, 2],
            edges: vec![edge(0, 1, Some(1), 1), edge(1, 0, Some(0), 1), edge(2, 3, Some(3), 2), edge(3, 2, Some(2), 2)],
            has_opposites: true,
            allows_half_edges: true,
        };
        assert!(!g.is_connected());
        g.check_axioms().unwrap();
        let single = WeightedGraph { vertex_weights: vec![1], edges: vec![], has_opposites: true, allows_half_edges: true };
        assert!(single.is_connected());
    }

    #[test]
    fn stripping_half_edges() {
        let loop_only = WeightedGraph {
            vertex_weights: vec![6],
            edges: vec![edge(0, 0, Some(0), 2)],
            has_opposites: true,
            allows_half_edges: true,
        };
        assert!(strip_half_edges(&loop_only).edges.is_empty());
        let mixed = WeightedGraph {
            vertex_weights: vec![6, 6],
            edges: vec![edge(0, 0, Some(0), 2), edge(0, 1, Some(2), 3), edge(1, 0, Some(1), 3)],
            has_opposites: true,
            allows_half_edges: true,
        };
        let s = strip_half_edges(&mixed);
        assert_eq!(s.edges, vec![edge(0, 1, Some(1), 3), edge(1, 0, Some(0), 3)]);
        s.check_axioms().unwrap();
        assert_eq!(strip_half_edges(&s), s);
    }

    #[test]
    fn axioms_reject_bad_weights() {
        let g = WeightedGraph {
            vertex_weights: vec![4],
            edges: vec![edge(0, 0, Some(0), 3)],
            has_opposites: true,
            allows_half_edges: true,
        };
        assert!(g.check_axioms().is_err());
    }
}
