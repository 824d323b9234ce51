//! Marked floor diagrams of class (d0, d1, d2, d3) and their quadratic multiplicities.
//!
//! A marked diagram is stored by listing its elements in marking order: positions
//! 2j-2 and 2j-1 form the fiber of label j <= s, and each later position is a fiber of
//! its own. References between elements are positions. Two markings are equivalent
//! iff some choice of order inside the pair fibers makes the lists equal, so the
//! lexicographically least such list is a canonical form.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::Error;
use crate::invariants::{Basis, BetaInvariant, MultiDegree};
use crate::witt::{trace_form, SquareClass, TPoly, WittClassQ};

pub const GEN_VERSION: &str = "fd-gen-1";

/// Sort d1 >= d2 >= d3 and check d0 > d1, d0 - d1 - d2 >= 0.
pub fn normalize_class(d: [i64; 4]) -> Result<[i64; 4], Error> {
    if d.iter().any(|&x| x < 0) {
        return Err(Error::OutsideDomain(d.to_vec()));
    }
    let mut t = [d[1], d[2], d[3]];
    t.sort_unstable_by(|a, b| b.cmp(a));
    let out = [d[0], t[0], t[1], t[2]];
    if out[0] <= out[1] || out[0] - out[1] - out[2] < 0 {
        return Err(Error::OutsideDomain(out.to_vec()));
    }
    Ok(out)
}

/// Number of elements 3 d0 - d1 - d2 - d3 - 1 of a diagram of the class.
pub fn element_count(d: [i64; 4]) -> usize {
    (3 * d[0] - d[1] - d[2] - d[3] - 1) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elem {
    Vertex { theta: u8 },
    Edge { tail: u8, head: u8, w: u8 },
    Source { head: u8 },
    Sink { tail: u8 },
}

impl Elem {
    fn remap(self, p: &[u8]) -> Elem {
        match self {
            Elem::Vertex { theta } => Elem::Vertex { theta },
            Elem::Edge { tail, head, w } => Elem::Edge { tail: p[tail as usize], head: p[head as usize], w },
            Elem::Source { head } => Elem::Source { head: p[head as usize] },
            Elem::Sink { tail } => Elem::Sink { tail: p[tail as usize] },
        }
    }

    fn touches(self, v: u8) -> bool {
        match self {
            Elem::Vertex { .. } => false,
            Elem::Edge { tail, head, .. } => tail == v || head == v,
            Elem::Source { head } => head == v,
            Elem::Sink { tail } => tail == v,
        }
    }

    /// Weight of an edge-like element.
    fn weight(self) -> u64 {
        match self {
            Elem::Edge { w, .. } => w as u64,
            _ => 1,
        }
    }

    fn endpoints(self) -> Vec<u8> {
        match self {
            Elem::Vertex { .. } => vec![],
            Elem::Edge { tail, head, .. } => vec![tail, head],
            Elem::Source { head } => vec![head],
            Elem::Sink { tail } => vec![tail],
        }
    }
}

/// A marked floor diagram in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkedDiagram {
    pub class: [i64; 4],
    pub s: usize,
    pub elems: Vec<Elem>,
}

fn swap_perm(n: usize, mask: u64) -> Vec<u8> {
    let mut p: Vec<u8> = (0..n as u8).collect();
    for j in 0..64 {
        if mask >> j & 1 == 1 {
            p.swap(2 * j, 2 * j + 1);
        }
    }
    p
}

fn apply_perm(elems: &[Elem], p: &[u8]) -> Vec<Elem> {
    let mut out = elems.to_vec();
    for (k, e) in elems.iter().enumerate() {
        out[p[k] as usize] = e.remap(p);
    }
    out
}

fn canonical_elems(elems: &[Elem], s: usize) -> Vec<Elem> {
    let mut best = elems.to_vec();
    for mask in 1u64..(1u64 << s) {
        let c = apply_perm(elems, &swap_perm(elems.len(), mask));
        if c < best {
            best = c;
        }
    }
    best
}

/// Data of a twin tree: its labels, twin root and the parity exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwinTree {
    /// Labels in 1..=s.
    pub labels: Vec<usize>,
    pub root: usize,
    pub root_weight: u64,
    pub sinks: usize,
    pub sources: usize,
    /// root weight + twin sinks + twin sources
    pub omega_inf: u64,
}

impl TwinTree {
    pub fn mask(&self) -> u64 {
        self.labels.iter().fold(0, |m, &j| m | 1 << (j - 1))
    }
}

/// Decomposition {1..s} = V + C + twin trees.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MarkingPartition {
    /// Labels whose fiber is a vertex with an adjacent edge, with the edge weight.
    pub v: Vec<(usize, u64)>,
    pub c: Vec<usize>,
    pub twins: Vec<TwinTree>,
}

impl MarkedDiagram {
    /// Canonicalize an element list given in marking order.
    pub fn new(class: [i64; 4], s: usize, elems: Vec<Elem>) -> Self {
        let elems = canonical_elems(&elems, s);
        MarkedDiagram { class, s, elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Marking label of a position.
    pub fn label(&self, pos: usize) -> usize {
        if pos < 2 * self.s {
            pos / 2 + 1
        } else {
            pos - self.s + 1
        }
    }

    pub fn bounded_edges(&self) -> impl Iterator<Item = (usize, u8, u8, u8)> + '_ {
        self.elems.iter().enumerate().filter_map(|(k, e)| match *e {
            Elem::Edge { tail, head, w } => Some((k, tail, head, w)),
            _ => None,
        })
    }

    /// Automorphisms as subsets of pair labels (bit j-1 for label j).
    pub fn automorphisms(&self) -> Vec<u64> {
        (0u64..(1u64 << self.s))
            .filter(|&m| apply_perm(&self.elems, &swap_perm(self.len(), m)) == self.elems)
            .collect()
    }

    pub fn partition(&self) -> Result<MarkingPartition, Error> {
        let aut = self.automorphisms();
        let minimal: Vec<u64> = aut
            .iter()
            .copied()
            .filter(|&m| m != 0 && !aut.iter().any(|&x| x != 0 && x != m && x & m == x))
            .collect();
        let union = minimal.iter().fold(0u64, |a, &m| {
            debug_assert_eq!(a & m, 0);
            a | m
        });
        if minimal.iter().map(|m| m.count_ones()).sum::<u32>() != union.count_ones() || 1usize << minimal.len() != aut.len() {
            return Err(Error::Internal(format!("automorphism group is not generated by disjoint twin trees: {aut:?}")));
        }
        let mut part = MarkingPartition::default();
        for j in 1..=self.s {
            if union >> (j - 1) & 1 == 1 {
                continue;
            }
            let (x, y) = (self.elems[2 * j - 2], self.elems[2 * j - 1]);
            let (a, b) = (2 * j as u8 - 2, 2 * j as u8 - 1);
            if matches!(x, Elem::Vertex { .. }) && y.touches(a) {
                part.v.push((j, y.weight()));
            } else if matches!(y, Elem::Vertex { .. }) && x.touches(b) {
                part.v.push((j, x.weight()));
            } else {
                part.c.push(j);
            }
        }
        for &mask in &minimal {
            let labels: Vec<usize> = (1..=self.s).filter(|j| mask >> (j - 1) & 1 == 1).collect();
            let mut root = None;
            let (mut sinks, mut sources) = (0, 0);
            for &j in &labels {
                let (x, y) = (self.elems[2 * j - 2], self.elems[2 * j - 1]);
                match (x, y) {
                    (Elem::Source { .. }, _) => sources += 1,
                    (Elem::Sink { .. }, _) => sinks += 1,
                    _ => {}
                }
                if matches!(x, Elem::Vertex { .. }) {
                    continue;
                }
                let shared = x.endpoints().into_iter().find(|v| {
                    y.endpoints().contains(v) && mask >> (self.label(*v as usize) - 1) & 1 == 0
                });
                if shared.is_some() {
                    if root.is_some() {
                        return Err(Error::Internal(format!("twin tree {labels:?} has two roots")));
                    }
                    root = Some((j, x.weight()));
                }
            }
            let (root, root_weight) =
                root.ok_or_else(|| Error::Internal(format!("twin tree {labels:?} has no root")))?;
            part.twins.push(TwinTree {
                labels,
                root,
                root_weight,
                sinks,
                sources,
                omega_inf: root_weight + sinks as u64 + sources as u64,
            });
        }
        Ok(part)
    }

    /// Even-weight bounded edges only occur in twin trees.
    pub fn is_essential(&self) -> Result<bool, Error> {
        let part = self.partition()?;
        let twin: u64 = part.twins.iter().fold(0, |a, t| a | t.mask());
        Ok(self.bounded_edges().all(|(k, _, _, w)| {
            w % 2 == 1 || (k < 2 * self.s && twin >> (self.label(k) - 1) & 1 == 1)
        }))
    }

    /// Quadratic multiplicity in Z[t_1..t_s]/(t^2 = 2t).
    pub fn multiplicity(&self) -> Result<TPoly, Error> {
        let s = self.s;
        let part = self.partition()?;
        let cmask = part.c.iter().fold(0u64, |m, &j| m | 1 << (j - 1));
        let mut mu = TPoly::t_set(s, cmask);
        for (k, _, _, w) in self.bounded_edges() {
            if k < 2 * s {
                mu = mu.mul(&TPoly::bracket(s, w as u64, self.label(k)));
            }
        }
        for t in &part.twins {
            mu = mu.mul(&twin_factor(s, t)?);
        }
        Ok(mu)
    }

    /// Product of squared bounded-edge weights.
    pub fn complex_multiplicity(&self) -> i64 {
        self.bounded_edges().map(|(_, _, _, w)| (w as i64).pow(2)).product()
    }

    /// JSON-lines record: vertices, edges and ends by vertex index, labels in the
    /// order vertices, edges, sources, sinks.
    pub fn to_record(&self, mult: &TPoly, essential: bool) -> Value {
        let mut vidx = vec![usize::MAX; self.len()];
        let mut ve = Vec::new();
        let mut phi_v = Vec::new();
        for (k, e) in self.elems.iter().enumerate() {
            if let Elem::Vertex { theta } = e {
                vidx[k] = ve.len();
                ve.push(*theta);
                phi_v.push(self.label(k));
            }
        }
        let (mut ed, mut src, mut snk) = (Vec::new(), Vec::new(), Vec::new());
        let (mut phi_e, mut phi_src, mut phi_snk) = (Vec::new(), Vec::new(), Vec::new());
        for (k, e) in self.elems.iter().enumerate() {
            match *e {
                Elem::Edge { tail, head, w } => {
                    ed.push(json!([vidx[tail as usize], vidx[head as usize], w]));
                    phi_e.push(self.label(k));
                }
                Elem::Source { head } => {
                    src.push(vidx[head as usize]);
                    phi_src.push(self.label(k));
                }
                Elem::Sink { tail } => {
                    snk.push(vidx[tail as usize]);
                    phi_snk.push(self.label(k));
                }
                Elem::Vertex { .. } => {}
            }
        }
        let phi: Vec<usize> = phi_v.into_iter().chain(phi_e).chain(phi_src).chain(phi_snk).collect();
        json!({"ve": ve, "ed": ed, "src": src, "snk": snk, "phi": phi, "mult": mult.to_json(), "essential": essential})
    }

    pub fn from_record(class: [i64; 4], s: usize, v: &Value) -> Result<Self, Error> {
        let bad = || Error::Parse("bad diagram record".into());
        let nums = |key: &str| -> Result<Vec<u64>, Error> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(bad)?
                .iter()
                .map(|x| x.as_u64().ok_or_else(bad))
                .collect()
        };
        let ve = nums("ve")?;
        let src = nums("src")?;
        let snk = nums("snk")?;
        let phi = nums("phi")?;
        let ed: Vec<Vec<u64>> = v
            .get("ed")
            .and_then(Value::as_array)
            .ok_or_else(bad)?
            .iter()
            .map(|e| {
                e.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|x| x.as_u64().ok_or_else(bad))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let n = ve.len() + ed.len() + src.len() + snk.len();
        if phi.len() != n || n != element_count(class) || ed.iter().any(|e| e.len() != 3) {
            return Err(bad());
        }
        // elements in record order, then sorted by label
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&k| phi[k]);
        let mut pos = vec![0u8; n];
        for (p, &k) in order.iter().enumerate() {
            pos[k] = p as u8;
        }
        let vpos = |i: u64| -> Result<u8, Error> {
            if (i as usize) < ve.len() {
                Ok(pos[i as usize])
            } else {
                Err(bad())
            }
        };
        let mut elems = vec![Elem::Vertex { theta: 0 }; n];
        for (i, &t) in ve.iter().enumerate() {
            elems[pos[i] as usize] = Elem::Vertex { theta: t as u8 };
        }
        let mut k = ve.len();
        for e in &ed {
            elems[pos[k] as usize] = Elem::Edge { tail: vpos(e[0])?, head: vpos(e[1])?, w: e[2] as u8 };
            k += 1;
        }
        for &h in &src {
            elems[pos[k] as usize] = Elem::Source { head: vpos(h)? };
            k += 1;
        }
        for &t in &snk {
            elems[pos[k] as usize] = Elem::Sink { tail: vpos(t)? };
            k += 1;
        }
        let d = MarkedDiagram::new(class, s, elems);
        for p in 0..n {
            if d.label(p) as u64 != phi[order[p]] {
                return Err(bad());
            }
        }
        Ok(d)
    }
}

/// (t_T + (-1)^w u_T)/2 for the twin tree T.
fn twin_factor(s: usize, t: &TwinTree) -> Result<TPoly, Error> {
    let m = t.mask();
    let sign = if t.omega_inf.is_multiple_of(2) { 1 } else { -1 };
    TPoly::t_set(s, m)
        .add(&TPoly::u_set(s, m).scale(sign))
        .halve()
        .map_err(|e| Error::Internal(format!("twin factor: {e}")))
}

/// Check the closed form of a twin-tree factor at the given square classes (one per label).
///
/// Left: (t_T + (-1)^w u_T)/2 times [w(e)] over bounded edges labelled in T, evaluated at delta.
/// Right: <2^(|T|+1)> prod over twin edges [w^2] sum over J in T, |J| = w mod 2, of prod <delta_j>.
pub fn twin_identity_holds(d: &MarkedDiagram, t: &TwinTree, deltas: &[SquareClass]) -> Result<bool, Error> {
    let s = d.s;
    let mut lhs = twin_factor(s, t)?;
    let mut edge_part = TPoly::constant(s, 1);
    for (k, _, _, w) in d.bounded_edges() {
        if k < 2 * s && t.labels.contains(&d.label(k)) {
            lhs = lhs.mul(&TPoly::bracket(s, w as u64, d.label(k)));
            if k % 2 == 0 {
                edge_part = edge_part.mul(&TPoly::bracket(s, (w as u64).pow(2), d.label(k)));
            }
        }
    }
    let lhs = lhs.eval_wittq(deltas)?;
    let mut sum = WittClassQ::zero();
    let n = t.labels.len();
    for sub in 0u64..(1 << n) {
        if !(sub.count_ones() as u64 + t.omega_inf).is_multiple_of(2) {
            continue;
        }
        let mut p = WittClassQ::from_int(1);
        for (b, &j) in t.labels.iter().enumerate() {
            if sub >> b & 1 == 1 {
                p = p.mul(&WittClassQ::rank_one(&deltas[j - 1]));
            }
        }
        sum = sum.add(&p);
    }
    let rhs = WittClassQ::pow2_class(n + 1).mul(&edge_part.eval_wittq(deltas)?).mul(&sum);
    Ok(lhs == rhs)
}

/// Alternative closed form of the twin factor via the product of edge weights in T.
pub fn twin_factor_by_weight(d: &MarkedDiagram, t: &TwinTree) -> Result<TPoly, Error> {
    let s = d.s;
    let m = t.mask();
    let w: i64 = d
        .bounded_edges()
        .filter(|(k, ..)| *k < 2 * s && t.labels.contains(&d.label(*k)))
        .map(|(.., w)| w as i64)
        .product();
    let sign = if t.omega_inf.is_multiple_of(2) { 1 } else { -1 };
    let u = TPoly::u_set(s, m).scale(sign * w);
    let p = if w % 2 == 1 { TPoly::t_set(s, m).add(&u) } else { u };
    p.halve()
}

#[derive(Clone, Copy)]
struct Targets {
    nv: usize,
    ne: usize,
    nsrc: usize,
    nsnk: usize,
    theta1: usize,
    /// vertices with theta + div = 1
    c1: usize,
    maxw: u8,
}

impl Targets {
    fn of(d: [i64; 4]) -> Self {
        let nv = (d[0] - d[1]) as usize;
        Targets {
            nv,
            ne: nv - 1,
            nsrc: (d[0] - d[2] - d[3]) as usize,
            nsnk: d[1] as usize,
            theta1: d[3] as usize,
            c1: (d[0] - d[1] - d[2]) as usize,
            maxw: d[0] as u8,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum GElem {
    V { theta: u8 },
    E { tail: u8, head: Option<u8>, w: u8 },
    Src { head: Option<u8> },
    Snk { tail: u8 },
}

#[derive(Clone)]
struct State {
    elems: Vec<GElem>,
    /// positions of sources and edges without a head yet
    open: Vec<u8>,
    /// remaining outgoing weight per position (vertices only)
    budget: Vec<i64>,
    nv: usize,
    ne: usize,
    nsrc: usize,
    nsnk: usize,
    theta1: usize,
    c1: usize,
}

impl State {
    fn new() -> Self {
        State { elems: vec![], open: vec![], budget: vec![], nv: 0, ne: 0, nsrc: 0, nsnk: 0, theta1: 0, c1: 0 }
    }

    fn push(&mut self, e: GElem, budget: i64) {
        self.elems.push(e);
        self.budget.push(budget);
    }

    /// All ways to append one element.
    fn extensions(&self, t: &Targets) -> Vec<State> {
        let mut out = Vec::new();
        let pos = self.elems.len() as u8;
        if self.nsrc < t.nsrc {
            let mut st = self.clone();
            st.push(GElem::Src { head: None }, 0);
            st.open.push(pos);
            st.nsrc += 1;
            out.push(st);
        }
        for v in 0..self.elems.len() {
            let b = self.budget[v];
            if b <= 0 {
                continue;
            }
            if self.nsnk < t.nsnk {
                let mut st = self.clone();
                st.budget[v] -= 1;
                st.push(GElem::Snk { tail: v as u8 }, 0);
                st.nsnk += 1;
                out.push(st);
            }
            if self.ne < t.ne {
                for w in 1..=b.min(t.maxw as i64) {
                    let mut st = self.clone();
                    st.budget[v] -= w;
                    st.push(GElem::E { tail: v as u8, head: None, w: w as u8 }, 0);
                    st.open.push(pos);
                    st.ne += 1;
                    out.push(st);
                }
            }
        }
        if self.nv < t.nv {
            let k = self.open.len();
            for sub in 0u32..(1 << k) {
                let mut inw = 0i64;
                for b in 0..k {
                    if sub >> b & 1 == 1 {
                        inw += match self.elems[self.open[b] as usize] {
                            GElem::E { w, .. } => w as i64,
                            _ => 1,
                        };
                    }
                }
                for theta in 0..2u8 {
                    if theta == 1 && self.theta1 >= t.theta1 {
                        continue;
                    }
                    if theta == 0 && self.nv - self.theta1 >= t.nv - t.theta1 {
                        continue;
                    }
                    for c in 0..2i64 {
                        if c == 1 && self.c1 >= t.c1 {
                            continue;
                        }
                        if c == 0 && self.nv - self.c1 >= t.nv - t.c1 {
                            continue;
                        }
                        let budget = theta as i64 + inw - c;
                        if budget < 0 {
                            continue;
                        }
                        let mut st = self.clone();
                        let mut open = Vec::new();
                        for b in 0..k {
                            let p = self.open[b];
                            if sub >> b & 1 == 1 {
                                match &mut st.elems[p as usize] {
                                    GElem::E { head, .. } | GElem::Src { head } => *head = Some(pos),
                                    _ => unreachable!(),
                                }
                            } else {
                                open.push(p);
                            }
                        }
                        st.open = open;
                        st.push(GElem::V { theta }, budget);
                        st.nv += 1;
                        st.theta1 += theta as usize;
                        st.c1 += c as usize;
                        out.push(st);
                    }
                }
            }
        }
        out
    }

    fn viable(&self, t: &Targets) -> bool {
        if self.nv == t.nv && !self.open.is_empty() {
            return false;
        }
        // every vertex with positive budget needs its own outgoing element
        let needy = self.budget.iter().filter(|&&b| b > 0).count();
        let total: i64 = self.budget.iter().sum();
        let outs_left = (t.ne - self.ne) + (t.nsnk - self.nsnk);
        if needy > outs_left {
            return false;
        }
        // remaining sinks carry weight 1 each and cannot absorb more than that
        if self.nv == t.nv && self.ne == t.ne && total != (t.nsnk - self.nsnk) as i64 {
            return false;
        }
        true
    }

    fn finish(&self, t: &Targets) -> Option<Vec<Elem>> {
        if !self.open.is_empty() || self.budget.iter().any(|&b| b != 0) {
            return None;
        }
        if (self.nv, self.ne, self.nsrc, self.nsnk, self.theta1, self.c1) != (t.nv, t.ne, t.nsrc, t.nsnk, t.theta1, t.c1) {
            return None;
        }
        // connectivity (with |E| = |V| - 1 this makes a tree)
        let n = self.elems.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut comps = self.nv;
        let mut elems = Vec::with_capacity(n);
        for e in &self.elems {
            elems.push(match *e {
                GElem::V { theta } => Elem::Vertex { theta },
                GElem::E { tail, head, w } => {
                    let head = head?;
                    let (a, b) = (find(&mut parent, tail as usize), find(&mut parent, head as usize));
                    if a == b {
                        return None;
                    }
                    parent[a] = b;
                    comps -= 1;
                    Elem::Edge { tail, head, w }
                }
                GElem::Src { head } => Elem::Source { head: head? },
                GElem::Snk { tail } => Elem::Sink { tail },
            });
        }
        (comps == 1).then_some(elems)
    }
}

/// Fiber sizes of the labels of an s-marking on n elements.
fn fibers(n: usize, s: usize) -> Vec<usize> {
    let mut f = vec![2; s];
    f.extend(std::iter::repeat_n(1, n - 2 * s));
    f
}

/// States after filling the fiber of the given label.
fn fill_slot(st: &State, size: usize, t: &Targets) -> Vec<State> {
    let mut out = Vec::new();
    for a in st.extensions(t) {
        if size == 1 {
            if a.viable(t) {
                out.push(a);
            }
        } else {
            for b in a.extensions(t) {
                if b.viable(t) {
                    out.push(b);
                }
            }
        }
    }
    out
}

fn search(st: State, slot: usize, fib: &[usize], t: &Targets, s: usize, out: &mut BTreeSet<Vec<Elem>>) {
    if slot == fib.len() {
        if let Some(e) = st.finish(t) {
            out.insert(canonical_elems(&e, s));
        }
        return;
    }
    for next in fill_slot(&st, fib[slot], t) {
        search(next, slot + 1, fib, t, s, out);
    }
}

/// Enumeration settings: worker count and optional cache directory.
#[derive(Clone, Debug, Default)]
pub struct FdOptions {
    pub jobs: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

impl FdOptions {
    /// Cache directory from the WW_CACHE_DIR environment variable, if set.
    pub fn from_env() -> Self {
        FdOptions { jobs: None, cache_dir: std::env::var_os("WW_CACHE_DIR").map(PathBuf::from) }
    }
}

/// A diagram with its multiplicity (zero when not essential).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub diagram: MarkedDiagram,
    pub essential: bool,
    pub mult: TPoly,
}

fn enumerate_raw(class: [i64; 4], s: usize, jobs: Option<usize>) -> Vec<MarkedDiagram> {
    let n = element_count(class);
    let t = Targets::of(class);
    let fib = fibers(n, s);
    // expand a frontier breadth-first, then split it across workers
    let mut frontier = vec![State::new()];
    let mut depth = 0;
    while depth < fib.len() && frontier.len() < 256 {
        frontier = frontier.iter().flat_map(|st| fill_slot(st, fib[depth], &t)).collect();
        depth += 1;
    }
    let run = |frontier: Vec<State>| -> BTreeSet<Vec<Elem>> {
        frontier
            .into_par_iter()
            .map(|st| {
                let mut set = BTreeSet::new();
                search(st, depth, &fib, &t, s, &mut set);
                set
            })
            .reduce(BTreeSet::new, |mut a, b| {
                a.extend(b);
                a
            })
    };
    let set = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build().unwrap().install(|| run(frontier)),
        None => run(frontier),
    };
    set.into_iter().map(|elems| MarkedDiagram { class, s, elems }).collect()
}

fn cache_path(dir: &Path, class: [i64; 4], s: usize) -> PathBuf {
    dir.join(format!("fd-{}-{}-{}-{}-s{}.jsonl", class[0], class[1], class[2], class[3], s))
}

fn read_cache(path: &Path, class: [i64; 4], s: usize) -> Option<Vec<Entry>> {
    let src = fs::read_to_string(path).ok()?;
    let mut lines = src.lines();
    let header: Value = serde_json::from_str(lines.next()?).ok()?;
    if header != json!({"class": class, "s": s, "gen_version": GEN_VERSION}) {
        return None;
    }
    let mut out = Vec::new();
    for l in lines {
        let v: Value = serde_json::from_str(l).ok()?;
        let diagram = MarkedDiagram::from_record(class, s, &v).ok()?;
        let essential = v.get("essential")?.as_bool()?;
        let mult = TPoly::from_json(s, v.get("mult")?).ok()?;
        out.push(Entry { diagram, essential, mult });
    }
    Some(out)
}

fn write_cache(path: &Path, class: [i64; 4], s: usize, entries: &[Entry]) -> Result<(), Error> {
    let dir = path.parent().unwrap();
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{}.tmp{}", path.file_name().unwrap().to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        writeln!(f, "{}", json!({"class": class, "s": s, "gen_version": GEN_VERSION}))?;
        for e in entries {
            writeln!(f, "{}", e.diagram.to_record(&e.mult, e.essential))?;
        }
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Every s-marked diagram of the class up to equivalence, essential or not.
pub fn enumerate_all(class: [i64; 4], s: usize, opts: &FdOptions) -> Result<Vec<Entry>, Error> {
    let class = normalize_class(class)?;
    let n = element_count(class);
    if 2 * s > n {
        return Err(Error::Degree(format!("s = {s} exceeds m = {}", n / 2)));
    }
    if let Some(dir) = &opts.cache_dir {
        if let Some(hit) = read_cache(&cache_path(dir, class, s), class, s) {
            return Ok(hit);
        }
    }
    let entries = enumerate_raw(class, s, opts.jobs)
        .into_iter()
        .map(|d| {
            let essential = d.is_essential()?;
            let mult = if essential { d.multiplicity()? } else { TPoly::zero(s) };
            Ok(Entry { diagram: d, essential, mult })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if let Some(dir) = &opts.cache_dir {
        write_cache(&cache_path(dir, class, s), class, s, &entries)?;
    }
    Ok(entries)
}

/// Equivalence classes of essential s-marked diagrams.
pub fn enumerate_marked(class: [i64; 4], s: usize, opts: &FdOptions) -> Result<Vec<MarkedDiagram>, Error> {
    Ok(enumerate_all(class, s, opts)?.into_iter().filter(|e| e.essential).map(|e| e.diagram).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadInvariantResult {
    pub class: [i64; 4],
    pub s: usize,
    pub value: TPoly,
    pub ledger: Vec<(MarkedDiagram, TPoly)>,
}

impl QuadInvariantResult {
    /// m = floor(n/2) of the class.
    pub fn m(&self) -> usize {
        element_count(self.class) / 2
    }
}

/// Sum of multiplicities over essential s-marked diagrams.
pub fn quad_invariant(class: [i64; 4], s: usize, opts: &FdOptions) -> Result<QuadInvariantResult, Error> {
    let class = normalize_class(class)?;
    let entries = enumerate_all(class, s, opts)?;
    let mut value = TPoly::zero(s);
    let mut ledger = Vec::new();
    for e in entries.into_iter().filter(|e| e.essential) {
        value.add_assign(&e.mult);
        ledger.push((e.diagram, e.mult));
    }
    Ok(QuadInvariantResult { class, s, value, ledger })
}

/// Beta coefficients of a symmetric result at s = m.
pub fn beta_extract(r: &QuadInvariantResult) -> Result<BetaInvariant, Error> {
    let n = element_count(r.class);
    let m = n / 2;
    if r.s != m {
        return Err(Error::Degree(format!("beta extraction needs s = m = {m}, got s = {}", r.s)));
    }
    let a: Vec<i64> = (0..=m).map(|i| r.value.coeff((1u64 << i) - 1)).collect();
    for mask in 0u64..(1u64 << m) {
        let expected = a[mask.count_ones() as usize];
        let got = r.value.coeff(mask);
        if got != expected {
            return Err(Error::Asymmetric { mask, got, expected });
        }
    }
    BetaInvariant::from_ints(MultiDegree::single(n), Basis::Beta, &a)
}

/// Sum over all 0-marked diagrams of the product of squared edge weights.
pub fn classical_count(class: [i64; 4], opts: &FdOptions) -> Result<i64, Error> {
    Ok(enumerate_all(class, 0, opts)?.iter().map(|e| e.diagram.complex_multiplicity()).sum())
}

/// Quadratic count evaluated at delta = (-1, ..., -1).
pub fn welschinger_via_fd(class: [i64; 4], s: usize, opts: &FdOptions) -> Result<i64, Error> {
    let r = quad_invariant(class, s, opts)?;
    r.value.eval_signs(&vec![-1; s])
}

/// Trace form helper re-exported for callers evaluating multiplicities over Q.
pub fn trace_class(delta: &SquareClass) -> WittClassQ {
    WittClassQ::from_diag(&trace_form(delta))
}
