//! Welschinger-Witt invariants from tables of Welschinger numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::Error;
use crate::invariants::{
    beta_from_multireal, multireal_from_beta_int, triangle_from_multireal, BetaInvariant, MultiDegree,
    MultirealTriangle,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    P2Blowup,
    P1xP1,
    P3Aggregate,
}

/// Class D = d_0 L - sum_j d_j E_j on the blow-up of P^2 in blocks of n_j points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurfaceClass {
    pub kind: SurfaceKind,
    pub n: Vec<usize>,
    pub d: Vec<i64>,
}

impl SurfaceClass {
    pub fn new(n: Vec<usize>, d: Vec<i64>) -> Result<Self, Error> {
        let c = SurfaceClass { kind: SurfaceKind::P2Blowup, n, d };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), Error> {
        if self.d.len() != self.n.len() + 1 {
            return Err(Error::Surface(format!("{} blocks but {} divisor coefficients", self.n.len(), self.d.len())));
        }
        if self.d.iter().any(|&x| x < 0) {
            return Err(Error::Surface(format!("negative coefficient in {:?}", self.d)));
        }
        if self.n0_signed() < 0 {
            return Err(Error::Surface(format!("n0 = {} is negative", self.n0_signed())));
        }
        Ok(())
    }

    fn n0_signed(&self) -> i64 {
        3 * self.d[0] - self.n.iter().zip(&self.d[1..]).map(|(&n, &d)| n as i64 * d).sum::<i64>() - 1
    }

    /// Number of real point conditions n_0 = 3 d_0 - sum n_j d_j - 1.
    pub fn n0(&self) -> usize {
        self.n0_signed() as usize
    }

    /// Multidegree (n_0, n_1, ..., n_r).
    pub fn degree(&self) -> MultiDegree {
        let mut v = vec![self.n0()];
        v.extend(&self.n);
        MultiDegree::new(v)
    }

    /// Total number of blown-up points.
    pub fn points(&self) -> usize {
        self.n.iter().sum()
    }

    /// Merge blocks with equal d_j and sort them by decreasing d_j.
    pub fn canonical(&self) -> SurfaceClass {
        let mut blocks: BTreeMap<i64, usize> = BTreeMap::new();
        for (&n, &d) in self.n.iter().zip(&self.d[1..]) {
            if n > 0 {
                *blocks.entry(d).or_insert(0) += n;
            }
        }
        let mut n = Vec::new();
        let mut d = vec![self.d[0]];
        for (dj, nj) in blocks.into_iter().rev() {
            n.push(nj);
            d.push(dj);
        }
        SurfaceClass { kind: self.kind, n, d }
    }

    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "d": self.d})
    }

    pub fn from_json(v: &Value) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("bad surface {v}"));
        let n = v
            .get("n")
            .and_then(Value::as_array)
            .ok_or_else(bad)?
            .iter()
            .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?;
        let d = v
            .get("d")
            .and_then(Value::as_array)
            .ok_or_else(bad)?
            .iter()
            .map(|x| x.as_i64().ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?;
        SurfaceClass::new(n, d)
    }
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={:?} d={:?}", self.n, self.d)
    }
}

/// Welschinger numbers w_s for s in N_m of the class's multidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WelschingerTable {
    pub surface: SurfaceClass,
    pub values: BTreeMap<Vec<usize>, i64>,
}

impl WelschingerTable {
    pub fn new(surface: SurfaceClass, values: BTreeMap<Vec<usize>, i64>) -> Result<Self, Error> {
        let t = WelschingerTable { surface, values };
        t.dense()?;
        Ok(t)
    }

    /// Table of multireal values of a beta-integral invariant.
    pub fn from_invariant(surface: SurfaceClass, inv: &BetaInvariant) -> Result<Self, Error> {
        let deg = surface.degree();
        if inv.degree != deg {
            return Err(Error::Degree(format!("invariant of degree {:?} for {}", inv.degree.n, surface)));
        }
        let w = multireal_from_beta_int(inv)?;
        Ok(WelschingerTable { surface, values: deg.indices().into_iter().zip(w).collect() })
    }

    /// Values in lexicographic order over N_m; errors on a missing entry.
    pub fn dense(&self) -> Result<Vec<i64>, Error> {
        let deg = self.surface.degree();
        let out: Vec<i64> = deg
            .indices()
            .into_iter()
            .map(|s| self.values.get(&s).copied().ok_or(Error::MissingEntry(s)))
            .collect::<Result<_, _>>()?;
        if self.values.len() != out.len() {
            return Err(Error::Surface("table has entries outside N_m".into()));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let values: Vec<Value> = self.values.iter().map(|(s, w)| json!({"s": s, "w": w})).collect();
        json!({"surface": self.surface.to_json(), "values": values})
    }

    pub fn from_json(v: &Value) -> Result<Self, Error> {
        let bad = || Error::Parse("bad Welschinger table".into());
        let surface = SurfaceClass::from_json(v.get("surface").ok_or_else(bad)?)?;
        let mut values = BTreeMap::new();
        for e in v.get("values").and_then(Value::as_array).ok_or_else(bad)? {
            let s = e
                .get("s")
                .and_then(Value::as_array)
                .ok_or_else(bad)?
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(bad))
                .collect::<Result<Vec<_>, _>>()?;
            let w = e.get("w").and_then(Value::as_i64).ok_or_else(bad)?;
            values.insert(s, w);
        }
        Self::new(surface, values)
    }
}

/// The unique beta-integral invariant with the given multireal values.
pub fn build_vw(table: &WelschingerTable) -> Result<BetaInvariant, Error> {
    beta_from_multireal(&table.surface.degree(), &table.dense()?)
}

/// The multireal triangle of the table.
pub fn triangle_semantics(table: &WelschingerTable) -> Result<MultirealTriangle, Error> {
    triangle_from_multireal(&table.surface.degree(), &table.dense()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AliasInput {
    P2 { d: i64 },
    /// Bidegree (a, b) with one real point on each ruling block.
    P1xP1 { a: i64, b: i64 },
    /// Bidegree (a, a) with the two points swapped by the real structure.
    P1xP1Sym { a: i64 },
    P3 { d: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolved {
    Single(SurfaceClass),
    /// Summands indexed by bidegree (d_1, d_2), d_1 < d_2.
    Aggregate(Vec<((i64, i64), SurfaceClass)>),
}

pub fn alias_resolve(input: AliasInput) -> Result<Resolved, Error> {
    let tag = |mut c: SurfaceClass, k: SurfaceKind| {
        c.kind = k;
        c
    };
    match input {
        AliasInput::P2 { d } => Ok(Resolved::Single(SurfaceClass::new(vec![], vec![d])?)),
        AliasInput::P1xP1 { a, b } => {
            Ok(Resolved::Single(tag(SurfaceClass::new(vec![1, 1], vec![a + b, a, b])?, SurfaceKind::P1xP1)))
        }
        AliasInput::P1xP1Sym { a } => {
            Ok(Resolved::Single(tag(SurfaceClass::new(vec![2], vec![2 * a, a])?, SurfaceKind::P1xP1)))
        }
        AliasInput::P3 { d } => {
            let mut out = Vec::new();
            for d1 in 0..=d {
                let d2 = d - d1;
                if d1 < d2 {
                    let c = SurfaceClass::new(vec![1, 1], vec![d, d1, d2])?;
                    out.push(((d1, d2), tag(c, SurfaceKind::P3Aggregate)));
                }
            }
            Ok(Resolved::Aggregate(out))
        }
    }
}

/// Witt-Grothendieck lift: the Witt class plus `padding` hyperbolic planes, of rank `rank`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GwLift {
    pub invariant: BetaInvariant,
    pub rank: i64,
    pub padding: i64,
}

pub fn wg_lift(inv: &BetaInvariant, gw: i64, wel0: i64) -> Result<GwLift, Error> {
    if (gw - wel0).rem_euclid(2) != 0 {
        return Err(Error::Parity { gw, wel: wel0 });
    }
    let b = inv.int_coeffs()?;
    let base: i64 = inv.degree.indices().iter().zip(&b).map(|(i, c)| c << i.iter().sum::<usize>()).sum();
    let diff = gw - base;
    if diff.rem_euclid(2) != 0 {
        return Err(Error::Parity { gw, wel: base });
    }
    if diff < 0 {
        return Err(Error::NegativePadding(diff / 2));
    }
    Ok(GwLift { invariant: inv.clone(), rank: gw, padding: diff / 2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    QuadraticSideDefined,
    WelschingerOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardReport {
    pub status: Hypothesis,
    pub surface_degree: i64,
    pub reason: String,
}

/// Classify whether the quadratic count of the class is covered by the standing hypotheses.
pub fn hypothesis_guard(surface: &SurfaceClass) -> GuardReport {
    let pts = surface.points();
    let deg = 9 - pts as i64;
    let (status, reason) = if pts <= 5 {
        (Hypothesis::QuadraticSideDefined, format!("del Pezzo surface of degree {deg} >= 4"))
    } else if pts == 6 && surface.n0() == 5 {
        (Hypothesis::WelschingerOnly, "cubic surface with n0 = 5 is excluded".to_string())
    } else if pts == 6 {
        (Hypothesis::QuadraticSideDefined, format!("cubic surface with n0 = {}", surface.n0()))
    } else {
        (Hypothesis::WelschingerOnly, format!("{pts} blown-up points exceed the del Pezzo bound"))
    };
    GuardReport { status, surface_degree: deg, reason }
}

macro_rules! fixtures {
    ($($name:literal),* $(,)?) => {
        const FIXTURES: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../data/", $name, ".json")))),*
        ];
    };
}

fixtures!(
    "p2-d1", "p2-d2", "p2-d3", "p2-d4", "p2-d5", "p2-d6",
    "p1xp1-0-1", "p1xp1-0-2", "p1xp1-0-3", "p1xp1-0-4",
    "p1xp1-1-1", "p1xp1-1-2", "p1xp1-1-3", "p1xp1-1-4", "p1xp1-1-5",
    "p1xp1-2-2", "p1xp1-2-3", "p1xp1-2-4", "p1xp1-2-5", "p1xp1-2-6", "p1xp1-2-7",
    "p1xp1-3-4", "p1xp1-3-5", "p1xp1-4-5",
    "p1xp1sym-1", "p1xp1sym-2", "p1xp1sym-3",
);

/// Names of the built-in tables.
pub fn builtin_names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

/// Built-in table by name.
pub fn builtin_table(name: &str) -> Result<WelschingerTable, Error> {
    let (_, src) = FIXTURES.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::Fixture(name.to_string()))?;
    let v: Value = serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
    WelschingerTable::from_json(&v)
}

/// Table loaded from `<data_dir>/<name>.json` when a data directory is given, else built in.
pub fn load_table(name: &str, data_dir: Option<&Path>) -> Result<WelschingerTable, Error> {
    if let Some(dir) = data_dir {
        let p = dir.join(format!("{name}.json"));
        if p.exists() {
            return load_table_file(&p);
        }
    }
    builtin_table(name)
}

pub fn load_table_file(path: &Path) -> Result<WelschingerTable, Error> {
    let src = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&src).map_err(|e| Error::Parse(e.to_string()))?;
    WelschingerTable::from_json(&v)
}

/// Fixture name for an alias, when one is shipped.
pub fn fixture_name(input: AliasInput) -> String {
    match input {
        AliasInput::P2 { d } => format!("p2-d{d}"),
        AliasInput::P1xP1 { a, b } => format!("p1xp1-{}-{}", a.min(b), a.max(b)),
        AliasInput::P1xP1Sym { a } => format!("p1xp1sym-{a}"),
        AliasInput::P3 { d } => format!("p3-d{d}"),
    }
}

/// Table for a single-surface alias; bidegrees are looked up in increasing order,
/// so (a, b) with a > b is served by the (b, a) table with the two blocks swapped.
pub fn alias_table(input: AliasInput, data_dir: Option<&Path>) -> Result<WelschingerTable, Error> {
    let t = load_table(&fixture_name(input), data_dir)?;
    if let AliasInput::P1xP1 { a, b } = input {
        if a > b {
            let surface = SurfaceClass { kind: SurfaceKind::P1xP1, n: vec![1, 1], d: vec![a + b, a, b] };
            let values = t
                .values
                .iter()
                .map(|(s, &w)| (vec![s[0], s[2], s[1]], w))
                .collect();
            return WelschingerTable::new(surface, values);
        }
    }
    let mut t = t;
    if !matches!(input, AliasInput::P2 { .. }) {
        t.surface.kind = SurfaceKind::P1xP1;
    }
    Ok(t)
}

/// Aggregate P^3 invariant: the sum over its bidegree summands.
pub fn p3_invariant(d: i64, data_dir: Option<&Path>) -> Result<BetaInvariant, Error> {
    let Resolved::Aggregate(parts) = alias_resolve(AliasInput::P3 { d })? else {
        unreachable!()
    };
    let mut total: Option<BetaInvariant> = None;
    for ((d1, d2), _) in parts {
        let v = build_vw(&alias_table(AliasInput::P1xP1 { a: d1, b: d2 }, data_dir)?)?;
        total = Some(match total {
            None => v,
            Some(t) => t.add(&v)?,
        });
    }
    total.ok_or_else(|| Error::Surface(format!("no summands for degree {d}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases() {
        assert_eq!(
            alias_resolve(AliasInput::P1xP1 { a: 3, b: 4 }).unwrap(),
            Resolved::Single(SurfaceClass { kind: SurfaceKind::P1xP1, n: vec![1, 1], d: vec![7, 3, 4] })
        );
        let Resolved::Single(c) = alias_resolve(AliasInput::P1xP1Sym { a: 3 }).unwrap() else { panic!() };
        assert_eq!((c.n, c.d), (vec![2], vec![6, 3]));
        let Resolved::Aggregate(p) = alias_resolve(AliasInput::P3 { d: 3 }).unwrap() else { panic!() };
        assert_eq!(p.iter().map(|(k, _)| *k).collect::<Vec<_>>(), vec![(0, 3), (1, 2)]);
    }

    #[test]
    fn canonical_blocks() {
        let c = SurfaceClass::new(vec![1, 2, 1], vec![9, 2, 3, 2]).unwrap().canonical();
        assert_eq!((c.n, c.d), (vec![2, 2], vec![9, 3, 2]));
        assert!(SurfaceClass::new(vec![1], vec![1, 3]).is_err());
    }

    #[test]
    fn guard() {
        let p2 = SurfaceClass::new(vec![], vec![5]).unwrap();
        assert_eq!(hypothesis_guard(&p2).status, Hypothesis::QuadraticSideDefined);
        // six points, n0 = 3*4 - 6 - 1 = 5
        let c = SurfaceClass::new(vec![6], vec![4, 1]).unwrap();
        assert_eq!(c.n0(), 5);
        assert_eq!(hypothesis_guard(&c).status, Hypothesis::WelschingerOnly);
        let c7 = SurfaceClass::new(vec![7], vec![3, 1]).unwrap();
        assert_eq!(hypothesis_guard(&c7).status, Hypothesis::WelschingerOnly);
        let c6 = SurfaceClass::new(vec![6], vec![3, 1]).unwrap();
        assert_eq!(hypothesis_guard(&c6).status, Hypothesis::QuadraticSideDefined);
    }

    #[test]
    fn lifts() {
        let v1 = BetaInvariant::beta(2, &[1]);
        let l = wg_lift(&v1, 1, 1).unwrap();
        assert_eq!((l.rank, l.padding), (1, 0));
        let v4 = BetaInvariant::beta(11, &[0, 8, 2, 1]);
        let l = wg_lift(&v4, 620, 240).unwrap();
        assert_eq!(l.padding, (620 - 32) / 2);
        assert!(matches!(wg_lift(&v4, 621, 240), Err(Error::Parity { .. })));
        assert!(matches!(wg_lift(&v4, 30, 240), Err(Error::NegativePadding(_))));
        let z = BetaInvariant::beta(5, &[]);
        assert_eq!(wg_lift(&z, 0, 0).unwrap().padding, 0);
    }
}
