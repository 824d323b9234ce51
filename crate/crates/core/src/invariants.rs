//! Witt invariants of etale algebras in the beta, lambda, alpha and chi bases,
//! multireal values and triangles, cuts, splits and ramification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::Error;
use crate::witt::{trace_form, SquareClass, TPoly, WittClassQ};

pub type Rat = Ratio<i128>;

pub fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i128 = 1;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r as i64
}

/// Degree vector (n_0, ..., n_r) together with the index box N_m.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiDegree {
    pub n: Vec<usize>,
}

impl MultiDegree {
    pub fn new(n: Vec<usize>) -> Self {
        MultiDegree { n }
    }

    pub fn single(n: usize) -> Self {
        MultiDegree { n: vec![n] }
    }

    pub fn m(&self) -> Vec<usize> {
        self.n.iter().map(|&x| x / 2).collect()
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn size(&self) -> usize {
        self.m().iter().map(|&x| x + 1).product()
    }

    /// All multi-indices of N_m in lexicographic order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        box_indices(&self.m())
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        let m = self.m();
        let mut f = 0;
        for (j, &i) in idx.iter().enumerate() {
            f = f * (m[j] + 1) + i;
        }
        f
    }
}

/// All vectors 0 <= i <= m componentwise, lexicographic.
pub fn box_indices(m: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &mj in m {
        let mut next = Vec::with_capacity(out.len() * (mj + 1));
        for v in &out {
            for i in 0..=mj {
                let mut w = v.clone();
                w.push(i);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Beta,
    Lambda,
    Alpha,
    Chi,
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Beta => "beta",
            Basis::Lambda => "lambda",
            Basis::Alpha => "alpha",
            Basis::Chi => "chi",
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Basis::Beta => "b",
            Basis::Lambda => "l",
            Basis::Alpha => "a",
            Basis::Chi => "x",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "beta" => Ok(Basis::Beta),
            "lambda" => Ok(Basis::Lambda),
            "alpha" => Ok(Basis::Alpha),
            "chi" => Ok(Basis::Chi),
            _ => Err(Error::Parse(format!("unknown basis {s}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Int,
    Witt,
}

/// Invariant stored by its coefficients in one of the bases, dense over N_m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaInvariant {
    pub degree: MultiDegree,
    pub basis: Basis,
    pub mode: Mode,
    coeffs: Vec<WittClassQ>,
}

impl BetaInvariant {
    pub fn zero(degree: MultiDegree, basis: Basis) -> Self {
        let n = degree.size();
        BetaInvariant { degree, basis, mode: Mode::Int, coeffs: vec![WittClassQ::zero(); n] }
    }

    /// Integer coefficients listed in lexicographic index order.
    pub fn from_ints(degree: MultiDegree, basis: Basis, c: &[i64]) -> Result<Self, Error> {
        if c.len() != degree.size() {
            return Err(Error::Degree(format!("{} coefficients for {} indices", c.len(), degree.size())));
        }
        Ok(BetaInvariant { degree, basis, mode: Mode::Int, coeffs: c.iter().map(|&x| WittClassQ::from_int(x)).collect() })
    }

    pub fn from_witt(degree: MultiDegree, basis: Basis, c: Vec<WittClassQ>) -> Result<Self, Error> {
        if c.len() != degree.size() {
            return Err(Error::Degree(format!("{} coefficients for {} indices", c.len(), degree.size())));
        }
        Ok(BetaInvariant { degree, basis, mode: Mode::Witt, coeffs: c })
    }

    /// Single-variable beta combination, padded with zeros up to m.
    pub fn beta(n: usize, c: &[i64]) -> Self {
        let mut v = vec![0; n / 2 + 1];
        v[..c.len()].copy_from_slice(c);
        Self::from_ints(MultiDegree::single(n), Basis::Beta, &v).unwrap()
    }

    pub fn coeffs(&self) -> &[WittClassQ] {
        &self.coeffs
    }

    pub fn coeff(&self, idx: &[usize]) -> &WittClassQ {
        &self.coeffs[self.degree.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], c: WittClassQ) {
        let f = self.degree.flat(idx);
        if c.as_int().is_none() {
            self.mode = Mode::Witt;
        }
        self.coeffs[f] = c;
    }

    /// Integer coefficients; errors unless every coefficient is n<1>.
    pub fn int_coeffs(&self) -> Result<Vec<i64>, Error> {
        self.coeffs.iter().map(|c| c.as_int().ok_or_else(|| Error::NotInteger(c.to_string()))).collect()
    }

    /// Move back to integer mode; errors unless every coefficient is an integer.
    pub fn demote(&self) -> Result<Self, Error> {
        self.int_coeffs()?;
        Ok(BetaInvariant { mode: Mode::Int, ..self.clone() })
    }

    pub fn promote(&self) -> Self {
        BetaInvariant { mode: Mode::Witt, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(WittClassQ::is_zero)
    }

    pub fn add(&self, o: &Self) -> Result<Self, Error> {
        if self.degree != o.degree || self.basis != o.basis {
            return Err(Error::Degree("adding invariants of different degree or basis".into()));
        }
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect();
        let mode = if self.mode == Mode::Int && o.mode == Mode::Int { Mode::Int } else { Mode::Witt };
        Ok(BetaInvariant { degree: self.degree.clone(), basis: self.basis, mode, coeffs })
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .degree
            .indices()
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(idx, c)| {
                let cv = match (self.mode, c.as_int()) {
                    (Mode::Int, Some(n)) => json!(n),
                    _ => c.to_json(),
                };
                json!({"idx": idx, "c": cv})
            })
            .collect();
        json!({
            "degree": self.degree.n,
            "basis": self.basis.name(),
            "mode": if self.mode == Mode::Int { "int" } else { "witt" },
            "coeffs": coeffs,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, Error> {
        let bad = |w: &str| Error::Parse(format!("invariant json: {w}"));
        let degree: Vec<usize> = v
            .get("degree")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("degree"))?
            .iter()
            .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| bad("degree")))
            .collect::<Result<_, _>>()?;
        let basis = Basis::parse(v.get("basis").and_then(Value::as_str).unwrap_or("beta"))?;
        let mode = match v.get("mode").and_then(Value::as_str).unwrap_or("int") {
            "int" => Mode::Int,
            "witt" => Mode::Witt,
            m => return Err(bad(m)),
        };
        let mut inv = BetaInvariant::zero(MultiDegree::new(degree), basis);
        inv.mode = mode;
        let m = inv.degree.m();
        for c in v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("coeffs"))? {
            let idx: Vec<usize> = c
                .get("idx")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("idx"))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| bad("idx")))
                .collect::<Result<_, _>>()?;
            if idx.len() != m.len() || idx.iter().zip(&m).any(|(i, mj)| i > mj) {
                return Err(bad("index outside N_m"));
            }
            let w = WittClassQ::from_json(c.get("c").ok_or_else(|| bad("c"))?)?;
            if mode == Mode::Int && w.as_int().is_none() {
                return Err(Error::NotInteger(w.to_string()));
            }
            let f = inv.degree.flat(&idx);
            inv.coeffs[f] = w;
        }
        Ok(inv)
    }
}

impl fmt::Display for BetaInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let sym = self.basis.symbol();
        for (idx, c) in self.degree.indices().into_iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let label = if idx.len() == 1 {
                format!("{sym}{}", idx[0])
            } else {
                let s: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                format!("{sym}({})", s.join(","))
            };
            match c.as_int() {
                Some(n) => {
                    if first {
                        write!(f, "{n} {label}")?;
                    } else if n < 0 {
                        write!(f, " - {} {label}", -n)?;
                    } else {
                        write!(f, " + {n} {label}")?;
                    }
                }
                None => {
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "({c}) {label}")?;
                }
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Multireal matrix M_m with entries 2^i binom(m-s, i).
pub fn multireal_matrix(m: usize) -> Vec<Vec<i64>> {
    (0..=m)
        .map(|s| (0..=m).map(|i| binom((m - s) as i64, i as i64) << i).collect())
        .collect()
}

/// Kronecker product of the multireal matrices, rows s and columns i in lexicographic order.
pub fn kron_multireal(m: &[usize]) -> Vec<Vec<i64>> {
    let idx = box_indices(m);
    let mats: Vec<Vec<Vec<i64>>> = m.iter().map(|&mj| multireal_matrix(mj)).collect();
    idx.iter()
        .map(|s| idx.iter().map(|i| (0..m.len()).map(|j| mats[j][s[j]][i[j]]).product()).collect())
        .collect()
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(a: &[Vec<i64>]) -> BigInt {
    let n = a.len();
    let mut m: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        BigInt::one()
    } else if negate {
        -prev
    } else {
        prev
    }
}

/// Triangular array c_i^u for u, i, u+i in N_m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultirealTriangle {
    pub degree: MultiDegree,
    pub entries: BTreeMap<(Vec<usize>, Vec<usize>), Rat>,
}

fn vadd(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn within(a: &[usize], m: &[usize]) -> bool {
    a.iter().zip(m).all(|(x, y)| x <= y)
}

fn unit(len: usize, j: usize) -> Vec<usize> {
    let mut e = vec![0; len];
    e[j] = 1;
    e
}

impl MultirealTriangle {
    pub fn get(&self, u: &[usize], i: &[usize]) -> Option<&Rat> {
        self.entries.get(&(u.to_vec(), i.to_vec()))
    }

    /// Left column c_i^0.
    pub fn left_column(&self) -> Vec<Rat> {
        let z = vec![0; self.degree.len()];
        self.degree.indices().iter().map(|i| self.entries[&(z.clone(), i.clone())]).collect()
    }

    /// Single-variable rows by i: row i lists c_i^u for u = 0..m-i.
    pub fn rows(&self) -> Vec<Vec<Rat>> {
        assert_eq!(self.degree.len(), 1);
        let m = self.degree.m()[0];
        (0..=m).map(|i| (0..=m - i).map(|u| self.entries[&(vec![u], vec![i])]).collect()).collect()
    }

    /// CSV with one line per cell: u, i, value.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,i,c\n");
        for ((u, i), c) in &self.entries {
            let f = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            s.push_str(&format!("{},{},{}\n", f(u), f(i), c));
        }
        s
    }
}

/// Triangle from multireal values w (indexed by s over N_m) via the halving recursion.
pub fn triangle_from_multireal(degree: &MultiDegree, w: &[i64]) -> Result<MultirealTriangle, Error> {
    let m = degree.m();
    if w.len() != degree.size() {
        return Err(Error::Degree(format!("{} values for {} multireal algebras", w.len(), degree.size())));
    }
    let r = m.len();
    let idx = degree.indices();
    let mut entries: BTreeMap<(Vec<usize>, Vec<usize>), Rat> = BTreeMap::new();
    let zero = vec![0; r];
    for u in &idx {
        let s: Vec<usize> = m.iter().zip(u).map(|(a, b)| a - b).collect();
        entries.insert((u.clone(), zero.clone()), Rat::from_integer(w[degree.flat(&s)] as i128));
    }
    let mut by_weight = idx.clone();
    by_weight.sort_by_key(|i| i.iter().sum::<usize>());
    let half = Rat::new(1, 2);
    for i in by_weight.iter().filter(|i| i.iter().any(|&x| x > 0)) {
        for u in &idx {
            if !within(&vadd(u, i), &m) {
                continue;
            }
            let mut val: Option<Rat> = None;
            for j in (0..r).filter(|&j| i[j] > 0) {
                let mut im = i.clone();
                im[j] -= 1;
                let up = vadd(u, &unit(r, j));
                let v = (entries[&(up, im.clone())] - entries[&(u.clone(), im)]) * half;
                match val {
                    None => val = Some(v),
                    Some(x) if x != v => {
                        return Err(Error::Internal(format!("recursion depends on direction at c_{i:?}^{u:?}")))
                    }
                    _ => {}
                }
            }
            entries.insert((u.clone(), i.clone()), val.unwrap());
        }
    }
    Ok(MultirealTriangle { degree: degree.clone(), entries })
}

/// Triangle rebuilt from its left column by c^u_i = c^{u-e_j}_i + 2 c^{u-e_j}_{i+e_j}.
pub fn triangle_from_beta(degree: &MultiDegree, b: &[i64]) -> MultirealTriangle {
    let m = degree.m();
    let r = m.len();
    let idx = degree.indices();
    let zero = vec![0; r];
    let mut entries: BTreeMap<(Vec<usize>, Vec<usize>), Rat> = BTreeMap::new();
    for i in &idx {
        entries.insert((zero.clone(), i.clone()), Rat::from_integer(b[degree.flat(i)] as i128));
    }
    let mut by_weight = idx.clone();
    by_weight.sort_by_key(|u| u.iter().sum::<usize>());
    let two = Rat::from_integer(2);
    for u in by_weight.iter().filter(|u| u.iter().any(|&x| x > 0)) {
        let j = u.iter().position(|&x| x > 0).unwrap();
        let mut um = u.clone();
        um[j] -= 1;
        for i in &idx {
            if !within(&vadd(u, i), &m) {
                continue;
            }
            let ip = vadd(i, &unit(r, j));
            let v = entries[&(um.clone(), i.clone())] + two * entries[&(um.clone(), ip)];
            entries.insert((u.clone(), i.clone()), v);
        }
    }
    MultirealTriangle { degree: degree.clone(), entries }
}

/// Beta coefficients from multireal values; fails if any triangle cell is fractional.
pub fn beta_from_multireal(degree: &MultiDegree, w: &[i64]) -> Result<BetaInvariant, Error> {
    let t = triangle_from_multireal(degree, w)?;
    for ((u, i), c) in &t.entries {
        if !c.is_integer() {
            return Err(Error::NotBetaIntegral { u: u.clone(), i: i.clone(), value: c.to_string() });
        }
    }
    let b: Vec<i64> = t.left_column().iter().map(|c| c.to_integer() as i64).collect();
    BetaInvariant::from_ints(degree.clone(), Basis::Beta, &b)
}

/// Multireal values w_s = sum_i b_i prod_j (M_{m_j})_{s_j, i_j}.
pub fn multireal_from_beta(inv: &BetaInvariant) -> Vec<WittClassQ> {
    let inv = to_beta(inv);
    let m = inv.degree.m();
    let k = kron_multireal(&m);
    k.iter()
        .map(|row| {
            row.iter()
                .zip(inv.coeffs())
                .filter(|(&x, c)| x != 0 && !c.is_zero())
                .fold(WittClassQ::zero(), |acc, (&x, c)| acc.add(&c.scale(x)))
        })
        .collect()
}

/// Integer multireal values; errors unless the invariant is beta-integral.
pub fn multireal_from_beta_int(inv: &BetaInvariant) -> Result<Vec<i64>, Error> {
    let b = to_beta(inv).int_coeffs()?;
    let k = kron_multireal(&inv.degree.m());
    Ok(k.iter().map(|row| row.iter().zip(&b).map(|(x, y)| x * y).sum()).collect())
}

type WMatrix = Vec<Vec<WittClassQ>>;

fn delta(m: i64, i: i64, k: i64) -> i64 {
    (k..=i).map(|j| (if (j - k) % 2 == 0 { 1 } else { -1 }) * binom(m - k, j - k) * binom(m, i - j)).sum()
}

/// Matrix L with X_i = sum_k L[i][k] beta_k for one variable of degree n.
pub fn to_beta_matrix(basis: Basis, n: usize) -> WMatrix {
    let m = n / 2;
    let zero = || WittClassQ::zero();
    let mut l: WMatrix = vec![vec![zero(); m + 1]; m + 1];
    match basis {
        Basis::Beta => {
            for (i, row) in l.iter_mut().enumerate() {
                row[i] = WittClassQ::from_int(1);
            }
        }
        Basis::Lambda => {
            let even = |i: usize, k: usize| -> WittClassQ {
                WittClassQ::pow2_class(i - k).scale(delta(m as i64, i as i64, k as i64))
            };
            for i in 0..=m {
                for k in 0..=i {
                    let mut c = even(i, k);
                    if n % 2 == 1 && i >= 1 && k < i {
                        // odd degree: lambda_i corresponds to lambda_i + lambda_{i-1} in degree n-1
                        c = c.add(&even(i - 1, k));
                    }
                    l[i][k] = c;
                }
            }
        }
        Basis::Alpha => {
            for i in 0..=m {
                for k in 0..=i {
                    let sgn = if (i - k) % 2 == 0 { 1 } else { -1 };
                    l[i][k] = WittClassQ::pow2_class(k).scale(sgn * binom((m - k) as i64, (i - k) as i64));
                }
            }
        }
        Basis::Chi => {
            let c = chi_matrix(n);
            for i in 0..=m {
                for k in 0..=i {
                    l[i][k] = WittClassQ::from_int(c[i][k]);
                }
            }
        }
    }
    l
}

/// Integer matrix with chi_i = sum_k c[i][k] beta_k.
///
/// On a product of m quadratic algebras (times K for odd n), Tr Sym^l(E) = a_l t + b_l with
/// a_l = floor((l+1)/2) and b_l = [l even]; the coefficient of beta_k in chi_i is then
/// [x^i] A(x)^k B(x)^(m-k), times 1/(1-x) for the extra factor K.
pub fn chi_matrix(n: usize) -> Vec<Vec<i64>> {
    let m = n / 2;
    let len = m + 1;
    let a: Vec<i64> = (0..len).map(|l| l.div_ceil(2) as i64).collect();
    let b: Vec<i64> = (0..len).map(|l| if l % 2 == 0 { 1 } else { 0 }).collect();
    let mul = |x: &[i64], y: &[i64]| -> Vec<i64> {
        let mut z = vec![0; len];
        for (i, &xi) in x.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate().take(len - i) {
                z[i + j] += xi * yj;
            }
        }
        z
    };
    let mut out = vec![vec![0; len]; len];
    for k in 0..=m {
        let mut g = vec![0; len];
        g[0] = 1;
        for _ in 0..k {
            g = mul(&g, &a);
        }
        for _ in 0..m - k {
            g = mul(&g, &b);
        }
        if n % 2 == 1 {
            g = mul(&g, &vec![1; len]);
        }
        for i in 0..=m {
            out[i][k] = g[i];
        }
    }
    out
}

/// Inverse of a lower triangular matrix whose diagonal entries square to 1.
fn invert_unitriangular(l: &WMatrix) -> WMatrix {
    let n = l.len();
    let mut inv: WMatrix = vec![vec![WittClassQ::zero(); n]; n];
    for i in 0..n {
        let d = &l[i][i];
        assert_eq!(d.mul(d), WittClassQ::from_int(1), "diagonal entry is not a unit");
        // beta_i = d (X_i - sum_{k<i} L[i][k] beta_k)
        let mut row = vec![WittClassQ::zero(); n];
        row[i] = WittClassQ::from_int(1);
        for k in 0..i {
            if l[i][k].is_zero() {
                continue;
            }
            for c in 0..n {
                if !inv[k][c].is_zero() {
                    row[c] = row[c].sub(&l[i][k].mul(&inv[k][c]));
                }
            }
        }
        inv[i] = row.iter().map(|x| x.mul(d)).collect();
    }
    inv
}

/// Matrix expressing beta_i = sum_k R[i][k] X_k.
pub fn from_beta_matrix(basis: Basis, n: usize) -> WMatrix {
    invert_unitriangular(&to_beta_matrix(basis, n))
}

/// new[.., k, ..] = sum_i old[.., i, ..] a[i][k] along one axis.
fn apply_axis(degree: &MultiDegree, coeffs: &[WittClassQ], axis: usize, a: &WMatrix) -> Vec<WittClassQ> {
    let mut out = vec![WittClassQ::zero(); coeffs.len()];
    for idx in degree.indices() {
        let c = &coeffs[degree.flat(&idx)];
        if c.is_zero() {
            continue;
        }
        for (k, x) in a[idx[axis]].iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let mut t = idx.clone();
            t[axis] = k;
            let f = degree.flat(&t);
            out[f] = out[f].add(&c.mul(x));
        }
    }
    out
}

fn to_beta(inv: &BetaInvariant) -> BetaInvariant {
    if inv.basis == Basis::Beta {
        return inv.clone();
    }
    let mut c = inv.coeffs.clone();
    for (axis, &n) in inv.degree.n.iter().enumerate() {
        c = apply_axis(&inv.degree, &c, axis, &to_beta_matrix(inv.basis, n));
    }
    BetaInvariant { degree: inv.degree.clone(), basis: Basis::Beta, mode: mode_of(&c, inv.basis), coeffs: c }
}

fn mode_of(c: &[WittClassQ], from: Basis) -> Mode {
    if from == Basis::Chi && c.iter().all(|x| x.as_int().is_some()) {
        // chi and beta differ by an integral unitriangular change
        Mode::Int
    } else {
        Mode::Witt
    }
}

/// Change of basis; exact, coefficients may acquire <2> factors.
pub fn convert_basis(inv: &BetaInvariant, target: Basis) -> BetaInvariant {
    if inv.basis == target {
        return inv.clone();
    }
    let b = to_beta(inv);
    if target == Basis::Beta {
        return b;
    }
    let mut c = b.coeffs.clone();
    for (axis, &n) in inv.degree.n.iter().enumerate() {
        c = apply_axis(&inv.degree, &c, axis, &from_beta_matrix(target, n));
    }
    let mode = if target == Basis::Chi && inv.mode == Mode::Int && c.iter().all(|x| x.as_int().is_some()) {
        Mode::Int
    } else {
        Mode::Witt
    };
    BetaInvariant { degree: inv.degree.clone(), basis: target, mode, coeffs: c }
}

/// One tensor factor of an etale algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgFactor {
    /// Product of E_delta over the listed classes (times K when n_j is odd).
    Multiquadratic(Vec<SquareClass>),
    /// R_s = (E_{-1})^s x K^(n-2s).
    Multireal(usize),
}

pub type EtaleAlgebraSpec = Vec<AlgFactor>;

fn elementary(vals: &[WittClassQ], upto: usize) -> Vec<WittClassQ> {
    let mut e = vec![WittClassQ::zero(); upto + 1];
    e[0] = WittClassQ::from_int(1);
    for v in vals {
        for i in (1..=upto).rev() {
            let add = e[i - 1].mul(v);
            e[i] = e[i].add(&add);
        }
    }
    e
}

/// Value of the invariant on an etale algebra.
pub fn eval_invariant(inv: &BetaInvariant, alg: &EtaleAlgebraSpec) -> Result<WittClassQ, Error> {
    let m = inv.degree.m();
    if alg.len() != m.len() {
        return Err(Error::Degree(format!("{} algebra factors for {} variables", alg.len(), m.len())));
    }
    let mut tables: Vec<Vec<WittClassQ>> = Vec::new();
    for (j, f) in alg.iter().enumerate() {
        match f {
            AlgFactor::Multireal(s) => {
                if *s > m[j] {
                    return Err(Error::Degree(format!("R_{s} does not fit in degree {}", inv.degree.n[j])));
                }
                tables.push(
                    (0..=m[j]).map(|i| WittClassQ::from_int(binom((m[j] - s) as i64, i as i64) << i)).collect(),
                );
            }
            AlgFactor::Multiquadratic(d) => {
                if d.len() != m[j] {
                    return Err(Error::Degree(format!("{} quadratic factors for m = {}", d.len(), m[j])));
                }
                let t: Vec<WittClassQ> = d.iter().map(|x| WittClassQ::from_diag(&trace_form(x))).collect();
                tables.push(elementary(&t, m[j]));
            }
        }
    }
    let b = to_beta(inv);
    let mut out = WittClassQ::zero();
    for idx in b.degree.indices() {
        let c = b.coeff(&idx);
        if c.is_zero() {
            continue;
        }
        let mut v = c.clone();
        for (j, &i) in idx.iter().enumerate() {
            v = v.mul(&tables[j][i]);
        }
        out = out.add(&v);
    }
    Ok(out)
}

/// Restriction to multiquadratic algebras as a t-polynomial; variables of factor j
/// form a consecutive block of m_j variables.
pub fn eval_symbolic(inv: &BetaInvariant) -> Result<TPoly, Error> {
    let m = inv.degree.m();
    let total: usize = m.iter().sum();
    if total > 64 {
        return Err(Error::Degree("more than 64 t-variables".into()));
    }
    let b = to_beta(inv);
    let ints = b.int_coeffs()?;
    let mut offsets = vec![0usize];
    for &mj in &m {
        offsets.push(offsets.last().unwrap() + mj);
    }
    let mut out = TPoly::zero(total);
    for idx in b.degree.indices() {
        let c = ints[b.degree.flat(&idx)];
        if c == 0 {
            continue;
        }
        let mut term = TPoly::constant(total, c);
        for (j, &i) in idx.iter().enumerate() {
            let mut e = TPoly::zero(total);
            for mask in 0u64..(1u64 << m[j]) {
                if mask.count_ones() as usize == i {
                    e = e.add(&TPoly::monomial(total, mask << offsets[j], 1));
                }
            }
            term = term.mul(&e);
        }
        out = out.add(&term);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutFlavor {
    /// adjoin E_1: beta_i -> beta_i + 2 beta_{i-1}
    Round,
    /// adjoin E_{-1}: beta_i -> beta_i
    Square,
    /// coefficient of Tr E: beta_i -> beta_{i-1}
    Brace,
}

fn cut_once(inv: &BetaInvariant, j: usize, flavor: CutFlavor) -> Result<BetaInvariant, Error> {
    if inv.degree.n[j] < 2 {
        return Err(Error::Degree(format!("cannot cut variable {j} of degree {}", inv.degree.n[j])));
    }
    let mut nd = inv.degree.clone();
    nd.n[j] -= 2;
    let mut out = BetaInvariant::zero(nd.clone(), Basis::Beta);
    out.mode = inv.mode;
    for idx in nd.indices() {
        let get = |k: usize| -> WittClassQ {
            let mut t = idx.clone();
            t[j] = k;
            inv.coeff(&t).clone()
        };
        let k = idx[j];
        let c = match flavor {
            CutFlavor::Round => get(k).add(&get(k + 1).scale(2)),
            CutFlavor::Square => get(k),
            CutFlavor::Brace => get(k + 1),
        };
        let f = nd.flat(&idx);
        out.coeffs[f] = c;
    }
    Ok(out)
}

/// The cut homomorphisms, applied u_j times in each variable j; result in the beta basis.
pub fn cut(inv: &BetaInvariant, u: &[usize], flavor: CutFlavor) -> Result<BetaInvariant, Error> {
    if u.len() != inv.degree.len() {
        return Err(Error::Degree("cut vector length".into()));
    }
    let mut cur = to_beta(inv);
    for (j, &uj) in u.iter().enumerate() {
        if 2 * uj > cur.degree.n[j] {
            return Err(Error::Degree(format!("degree {} minus {}", cur.degree.n[j], 2 * uj)));
        }
        for _ in 0..uj {
            cur = cut_once(&cur, j, flavor)?;
        }
    }
    Ok(cur)
}

/// Split off a quadratic factor of variable j as a new trailing variable of degree 2.
pub fn split(inv: &BetaInvariant, j: usize) -> Result<BetaInvariant, Error> {
    if j >= inv.degree.len() || inv.degree.n[j] < 2 {
        return Err(Error::Degree(format!("cannot split variable {j}")));
    }
    let b = to_beta(inv);
    let mut nd = b.degree.clone();
    nd.n[j] -= 2;
    nd.n.push(2);
    let mut out = BetaInvariant::zero(nd.clone(), Basis::Beta);
    out.mode = b.mode;
    for idx in nd.indices() {
        let (last, head) = idx.split_last().unwrap();
        let mut t = head.to_vec();
        t[j] += last;
        let f = nd.flat(&idx);
        out.coeffs[f] = b.coeff(&t).clone();
    }
    Ok(out)
}

/// Odd primes at which some coefficient has a nonzero residue.
pub fn ramified_primes(inv: &BetaInvariant) -> BTreeSet<u64> {
    to_beta(inv).coeffs.iter().flat_map(|c| c.ramified_primes()).collect()
}

/// True iff every multireal value has signature zero.
pub fn torsion_check(inv: &BetaInvariant) -> bool {
    let b = to_beta(inv);
    let by_values = multireal_from_beta(&b).iter().all(|w| w.signature() == 0);
    let by_coeffs = b.coeffs.iter().all(|c| c.signature() == 0);
    debug_assert_eq!(by_values, by_coeffs);
    by_values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_m2() {
        assert_eq!(multireal_matrix(2), vec![vec![1, 4, 4], vec![1, 2, 0], vec![1, 0, 0]]);
        assert_eq!(multireal_matrix(0), vec![vec![1]]);
        assert_eq!(determinant(&multireal_matrix(3)).magnitude(), &64u32.into());
    }

    #[test]
    fn small_triangles() {
        let d = MultiDegree::single(8);
        let t = triangle_from_multireal(&d, &[8, 6, 4, 2, 0]).unwrap();
        let rows = t.rows();
        let ints = |r: &Vec<Rat>| r.iter().map(|x| x.to_integer() as i64).collect::<Vec<_>>();
        assert_eq!(ints(&rows[1]), vec![1, 1, 1, 1]);
        assert_eq!(ints(&rows[2]), vec![0, 0, 0]);
        let b = beta_from_multireal(&d, &[8, 6, 4, 2, 0]).unwrap();
        assert_eq!(b.int_coeffs().unwrap(), vec![0, 1, 0, 0, 0]);
        let z = triangle_from_multireal(&d, &[0; 5]).unwrap();
        assert!(z.entries.values().all(|x| x.is_zero()));
    }

    #[test]
    fn non_integral_reports_cell() {
        let d = MultiDegree::single(2);
        match beta_from_multireal(&d, &[1, 0]) {
            Err(Error::NotBetaIntegral { u, i, value }) => {
                assert_eq!((u, i), (vec![0], vec![1]));
                assert_eq!(value, "1/2");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn d5_top_value() {
        let inv = BetaInvariant::beta(14, &[64, 0, 46, 16, 12, 4, 1, 0]);
        assert_eq!(multireal_from_beta_int(&inv).unwrap()[0], 18264);
    }

    #[test]
    fn lambda_two_even() {
        let lam = BetaInvariant::from_ints(MultiDegree::single(6), Basis::Lambda, &[0, 0, 1, 0]).unwrap();
        let b = convert_basis(&lam, Basis::Beta);
        assert_eq!(b.coeff(&[2]), &WittClassQ::from_int(1));
        assert_eq!(b.coeff(&[1]), &WittClassQ::two_class());
        assert_eq!(b.coeff(&[0]), &WittClassQ::from_int(-3));
    }

    #[test]
    fn eval_on_multireal() {
        let b1 = BetaInvariant::beta(11, &[0, 1]);
        assert_eq!(eval_invariant(&b1, &vec![AlgFactor::Multireal(2)]).unwrap(), WittClassQ::from_int(6));
        let b0 = BetaInvariant::beta(5, &[1]);
        let d = vec![SquareClass::from_int(3).unwrap(), SquareClass::from_int(-7).unwrap()];
        assert_eq!(eval_invariant(&b0, &vec![AlgFactor::Multiquadratic(d)]).unwrap(), WittClassQ::from_int(1));
    }

    #[test]
    fn cuts_and_splits() {
        let b2 = BetaInvariant::beta(6, &[0, 0, 1]);
        let r = cut(&b2, &[1], CutFlavor::Round).unwrap();
        assert_eq!(r.int_coeffs().unwrap(), vec![0, 2, 1]);
        let b0 = BetaInvariant::beta(6, &[1]);
        assert!(cut(&b0, &[1], CutFlavor::Brace).unwrap().is_zero());
        let s = split(&BetaInvariant::beta(4, &[0, 1]), 0).unwrap();
        assert_eq!(s.degree.n, vec![2, 2]);
        assert_eq!(s.int_coeffs().unwrap(), vec![0, 1, 1, 0]);
        let s0 = split(&BetaInvariant::beta(4, &[1]), 0).unwrap();
        assert_eq!(s0.int_coeffs().unwrap(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn ramification_examples() {
        let mut inv = BetaInvariant::beta(6, &[1, 2]);
        assert!(ramified_primes(&inv).is_empty());
        let three = WittClassQ::rank_one(&SquareClass::from_int(3).unwrap());
        inv.set(&[1], three.sub(&WittClassQ::from_int(1)));
        assert_eq!(ramified_primes(&inv).into_iter().collect::<Vec<_>>(), vec![3]);
        assert!(!torsion_check(&BetaInvariant::beta(6, &[1, 2])));
        let mut tor = BetaInvariant::zero(MultiDegree::single(6), Basis::Beta);
        assert!(torsion_check(&tor));
        tor.set(&[0], WittClassQ::from_int(1).sub(&three));
        tor.set(&[3], WittClassQ::from_int(1).sub(&three));
        assert!(torsion_check(&tor));
        let mut d = BetaInvariant::beta(6, &[0]);
        d.set(&[2], WittClassQ::from_int(1).sub(&WittClassQ::two_class()));
        assert!(ramified_primes(&d).is_empty());
    }
}
