//! Exact arithmetic in W(Q), W(F_p) and the square-class group of Q.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde_json::{json, Value};

use crate::error::Error;

static FACTOR_BOUND: AtomicU64 = AtomicU64::new(1_000_000);

/// Largest trial divisor used when factoring form entries.
pub fn factor_bound() -> u64 {
    FACTOR_BOUND.load(Ordering::Relaxed)
}

pub fn set_factor_bound(bound: u64) {
    FACTOR_BOUND.store(bound.max(2), Ordering::Relaxed);
}

/// Prime factorization by trial division up to the configured bound.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>, Error> {
    factorize_with_bound(n, factor_bound())
}

/// Prime factorization by trial division, exponents included.
pub fn factorize_with_bound(mut n: u64, bound: u64) -> Result<Vec<(u64, u32)>, Error> {
    let orig = n;
    let mut out = Vec::new();
    let mut p = 2u64;
    while n > 1 {
        if p.saturating_mul(p) > n {
            out.push((n, 1));
            break;
        }
        if p > bound {
            return Err(Error::FactorBound { value: orig, bound });
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    Ok(out)
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut r = 1u128;
    let mut base = b as u128 % m128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    r as u64
}

/// True when `c` (a unit mod the odd prime `p`) is a square mod `p`.
pub fn is_square_mod(c: u64, p: u64) -> bool {
    pow_mod(c % p, (p - 1) / 2, p) == 1
}

/// Smallest positive quadratic non-residue mod an odd prime.
pub fn non_residue(p: u64) -> u64 {
    (2..p).find(|&c| !is_square_mod(c, p)).expect("odd prime has a non-residue")
}

/// Element of Q*/Q*^2: a sign and a sorted list of distinct primes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SquareClass {
    negative: bool,
    primes: Vec<u64>,
}

impl SquareClass {
    pub fn one() -> Self {
        SquareClass { negative: false, primes: Vec::new() }
    }

    pub fn from_int(a: i64) -> Result<Self, Error> {
        if a == 0 {
            return Err(Error::ZeroEntry);
        }
        let primes = factorize(a.unsigned_abs())?
            .into_iter()
            .filter(|&(_, e)| e % 2 == 1)
            .map(|(p, _)| p)
            .collect();
        Ok(SquareClass { negative: a < 0, primes })
    }

    /// Class of num/den, which is the class of num*den.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self, Error> {
        if num == 0 || den == 0 {
            return Err(Error::ZeroEntry);
        }
        Ok(Self::from_int(num)?.mul(&Self::from_int(den)?))
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    pub fn mul(&self, other: &Self) -> Self {
        // symmetric difference of sorted prime lists
        let (a, b) = (&self.primes, &other.primes);
        let mut primes = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                primes.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                primes.push(b[j]);
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        SquareClass { negative: self.negative != other.negative, primes }
    }

    /// The squarefree representative, if it fits in an i128.
    pub fn value(&self) -> Option<i128> {
        let mut v: i128 = 1;
        for &p in &self.primes {
            v = v.checked_mul(p as i128)?;
        }
        Some(if self.negative { -v } else { v })
    }

    /// The unit a/p mod p for p dividing the representative.
    fn unit_mod(&self, p: u64) -> u64 {
        let mut r: u128 = 1;
        for &q in &self.primes {
            if q != p {
                r = r * (q % p) as u128 % p as u128;
            }
        }
        let r = r as u64;
        if self.negative {
            (p - r) % p
        } else {
            r
        }
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => {
                if self.negative {
                    write!(f, "-")?;
                }
                let s: Vec<String> = self.primes.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", s.join("*"))
            }
        }
    }
}

/// Diagonal quadratic form <a_1, ..., a_r>.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DiagonalForm {
    pub entries: Vec<SquareClass>,
}

impl DiagonalForm {
    pub fn new(entries: Vec<SquareClass>) -> Self {
        DiagonalForm { entries }
    }

    pub fn from_ints(v: &[i64]) -> Result<Self, Error> {
        Ok(DiagonalForm { entries: v.iter().map(|&a| SquareClass::from_int(a)).collect::<Result<_, _>>()? })
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn hyperbolic() -> Self {
        DiagonalForm { entries: vec![SquareClass::one(), SquareClass::from_int(-1).unwrap()] }
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        DiagonalForm { entries }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut entries = Vec::with_capacity(self.rank() * other.rank());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a.mul(b));
            }
        }
        DiagonalForm { entries }
    }
}

/// Trace form of E_delta = K[x]/(x^2 - delta), namely <2, 2 delta>.
pub fn trace_form(delta: &SquareClass) -> DiagonalForm {
    let two = SquareClass::from_int(2).unwrap();
    DiagonalForm::new(vec![two.clone(), two.mul(delta)])
}

/// Element of W(F_p), p odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WFpClass {
    /// p = 1 mod 4: a<1> + b<u>, a, b in Z/2.
    Mod1 { p: u64, a: u8, b: u8 },
    /// p = 3 mod 4: k<1>, k in Z/4.
    Mod3 { p: u64, k: u8 },
}

impl WFpClass {
    pub fn zero(p: u64) -> Self {
        if p % 4 == 1 {
            WFpClass::Mod1 { p, a: 0, b: 0 }
        } else {
            WFpClass::Mod3 { p, k: 0 }
        }
    }

    pub fn one(p: u64) -> Self {
        Self::of_unit(p, 1)
    }

    /// Class of the rank-one form <c> for a unit c mod p.
    pub fn of_unit(p: u64, c: u64) -> Self {
        let sq = is_square_mod(c, p);
        if p % 4 == 1 {
            if sq {
                WFpClass::Mod1 { p, a: 1, b: 0 }
            } else {
                WFpClass::Mod1 { p, a: 0, b: 1 }
            }
        } else if sq {
            WFpClass::Mod3 { p, k: 1 }
        } else {
            // a non-square is -1 times a square
            WFpClass::Mod3 { p, k: 3 }
        }
    }

    pub fn prime(&self) -> u64 {
        match *self {
            WFpClass::Mod1 { p, .. } | WFpClass::Mod3 { p, .. } => p,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, WFpClass::Mod1 { a: 0, b: 0, .. } | WFpClass::Mod3 { k: 0, .. })
    }

    pub fn add(&self, o: &Self) -> Self {
        match (*self, *o) {
            (WFpClass::Mod1 { p, a, b }, WFpClass::Mod1 { a: c, b: d, .. }) => {
                WFpClass::Mod1 { p, a: (a + c) % 2, b: (b + d) % 2 }
            }
            (WFpClass::Mod3 { p, k }, WFpClass::Mod3 { k: l, .. }) => WFpClass::Mod3 { p, k: (k + l) % 4 },
            _ => panic!("W(F_p) classes over different primes"),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn scale(&self, c: i64) -> Self {
        match *self {
            WFpClass::Mod1 { p, a, b } => {
                let c = c.rem_euclid(2) as u8;
                WFpClass::Mod1 { p, a: a * c % 2, b: b * c % 2 }
            }
            WFpClass::Mod3 { p, k } => WFpClass::Mod3 { p, k: (k as i64 * c).rem_euclid(4) as u8 },
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        match (*self, *o) {
            (WFpClass::Mod1 { p, a, b }, WFpClass::Mod1 { a: c, b: d, .. }) => {
                WFpClass::Mod1 { p, a: (a * c + b * d) % 2, b: (a * d + b * c) % 2 }
            }
            (WFpClass::Mod3 { p, k }, WFpClass::Mod3 { k: l, .. }) => WFpClass::Mod3 { p, k: k * l % 4 },
            _ => panic!("W(F_p) classes over different primes"),
        }
    }

    pub fn to_json(&self) -> Value {
        match *self {
            WFpClass::Mod1 { a, b, .. } => json!([a, b]),
            WFpClass::Mod3 { k, .. } => json!(k),
        }
    }

    pub fn from_json(p: u64, v: &Value) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("bad W(F_{p}) class {v}"));
        if p % 4 == 1 {
            let arr = v.as_array().ok_or_else(bad)?;
            if arr.len() != 2 {
                return Err(bad());
            }
            let a = arr[0].as_u64().filter(|&x| x < 2).ok_or_else(bad)? as u8;
            let b = arr[1].as_u64().filter(|&x| x < 2).ok_or_else(bad)? as u8;
            Ok(WFpClass::Mod1 { p, a, b })
        } else {
            let k = v.as_u64().filter(|&x| x < 4).ok_or_else(bad)? as u8;
            Ok(WFpClass::Mod3 { p, k })
        }
    }
}

impl fmt::Display for WFpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WFpClass::Mod1 { p, a, b } => {
                let u = non_residue(p);
                match (a, b) {
                    (0, 0) => write!(f, "0"),
                    (1, 0) => write!(f, "<1>"),
                    (0, 1) => write!(f, "<{u}>"),
                    _ => write!(f, "<1> + <{u}>"),
                }
            }
            WFpClass::Mod3 { k, .. } => match k {
                0 => write!(f, "0"),
                1 => write!(f, "<1>"),
                _ => write!(f, "{k}<1>"),
            },
        }
    }
}

/// Formal integer combination of rank-one forms, i.e. an element of Z[Q*/Q*^2].
pub type GroupRing = BTreeMap<SquareClass, i64>;

fn gr_add_term(g: &mut GroupRing, c: SquareClass, n: i64) {
    if n == 0 {
        return;
    }
    let e = g.entry(c.clone()).or_insert(0);
    *e += n;
    if *e == 0 {
        g.remove(&c);
    }
}

/// Element of W(Q) in canonical coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct WittClassQ {
    sig: i64,
    dy: u8,
    res: BTreeMap<u64, WFpClass>,
}

impl WittClassQ {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_int(n: i64) -> Self {
        WittClassQ { sig: n, dy: 0, res: BTreeMap::new() }
    }

    /// The class <2>.
    pub fn two_class() -> Self {
        WittClassQ { sig: 1, dy: 1, res: BTreeMap::new() }
    }

    /// <2^k>: <1> for k even, <2> for k odd.
    pub fn pow2_class(k: usize) -> Self {
        if k.is_multiple_of(2) {
            Self::from_int(1)
        } else {
            Self::two_class()
        }
    }

    pub fn rank_one(a: &SquareClass) -> Self {
        let mut g = GroupRing::new();
        g.insert(a.clone(), 1);
        Self::from_group_ring(&g)
    }

    pub fn from_diag(f: &DiagonalForm) -> Self {
        let mut g = GroupRing::new();
        for e in &f.entries {
            gr_add_term(&mut g, e.clone(), 1);
        }
        Self::from_group_ring(&g)
    }

    /// Build from explicit coordinates; zero residues are dropped.
    pub fn from_parts(sig: i64, dy: u8, res: impl IntoIterator<Item = WFpClass>) -> Self {
        let mut out = WittClassQ { sig, dy: dy % 2, res: BTreeMap::new() };
        for r in res {
            out.add_residue(r);
        }
        out
    }

    pub fn signature(&self) -> i64 {
        self.sig
    }

    pub fn dyadic(&self) -> u8 {
        self.dy
    }

    pub fn residues(&self) -> &BTreeMap<u64, WFpClass> {
        &self.res
    }

    pub fn residue(&self, p: u64) -> WFpClass {
        self.res.get(&p).copied().unwrap_or_else(|| WFpClass::zero(p))
    }

    pub fn is_zero(&self) -> bool {
        self.sig == 0 && self.dy == 0 && self.res.is_empty()
    }

    /// Some(n) when the class is n<1>.
    pub fn as_int(&self) -> Option<i64> {
        (self.dy == 0 && self.res.is_empty()).then_some(self.sig)
    }

    /// Odd primes with a nonzero residue.
    pub fn ramified_primes(&self) -> Vec<u64> {
        self.res.keys().copied().collect()
    }

    fn add_residue(&mut self, r: WFpClass) {
        let p = r.prime();
        let cur = self.residue(p).add(&r);
        if cur.is_zero() {
            self.res.remove(&p);
        } else {
            self.res.insert(p, cur);
        }
    }

    pub fn from_group_ring(g: &GroupRing) -> Self {
        let mut out = WittClassQ::zero();
        let mut dy: i64 = 0;
        for (c, &n) in g {
            out.sig += if c.negative { -n } else { n };
            if c.contains(2) {
                dy += n;
            }
            for &p in &c.primes {
                if p != 2 {
                    out.add_residue(WFpClass::of_unit(p, c.unit_mod(p)).scale(n));
                }
            }
        }
        out.dy = dy.rem_euclid(2) as u8;
        out
    }

    /// A diagonal representative as a signed combination of rank-one forms.
    pub fn representative(&self) -> GroupRing {
        let mut g = GroupRing::new();
        let mut pending = self.res.clone();
        while let Some((&p, &cls)) = pending.iter().next_back() {
            pending.remove(&p);
            let pc = SquareClass { negative: false, primes: vec![p] };
            match cls {
                WFpClass::Mod3 { k, .. } => gr_add_term(&mut g, pc, k as i64),
                WFpClass::Mod1 { a, b, .. } => {
                    gr_add_term(&mut g, pc.clone(), a as i64);
                    if b == 1 {
                        let u = non_residue(p);
                        let uc = SquareClass::from_int(u as i64).unwrap();
                        gr_add_term(&mut g, pc.mul(&uc), 1);
                        if u != 2 {
                            // <p u> also has a residue at the smaller prime u
                            let side = WFpClass::of_unit(u, p % u).neg();
                            let cur = pending.get(&u).copied().unwrap_or_else(|| WFpClass::zero(u)).add(&side);
                            if cur.is_zero() {
                                pending.remove(&u);
                            } else {
                                pending.insert(u, cur);
                            }
                        }
                    }
                }
            }
        }
        let cur = Self::from_group_ring(&g);
        let d = ((self.dy as i64) - (cur.dy as i64)).rem_euclid(2);
        let s = self.sig - cur.sig;
        gr_add_term(&mut g, SquareClass::from_int(2).unwrap(), d);
        gr_add_term(&mut g, SquareClass::one(), s - d);
        debug_assert_eq!(&Self::from_group_ring(&g), self);
        g
    }

    pub fn add(&self, o: &Self) -> Self {
        // every coordinate is additive on diagonal representatives
        let mut out = self.clone();
        out.sig += o.sig;
        out.dy = (out.dy + o.dy) % 2;
        for r in o.res.values() {
            out.add_residue(*r);
        }
        out
    }

    pub fn neg(&self) -> Self {
        WittClassQ { sig: -self.sig, dy: self.dy, res: self.res.iter().map(|(&p, r)| (p, r.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, n: i64) -> Self {
        WittClassQ {
            sig: self.sig * n,
            dy: (self.dy as i64 * n).rem_euclid(2) as u8,
            res: self.res.iter().map(|(&p, r)| (p, r.scale(n))).filter(|(_, r)| !r.is_zero()).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.res.is_empty() && o.res.is_empty() {
            // (x + e<2>)(y + f<2>) = xy + ef + (xf + ye)<2>
            let (e, f) = (self.dy as i64, o.dy as i64);
            let (x, y) = (self.sig - e, o.sig - f);
            let two = x * f + y * e;
            return WittClassQ { sig: x * y + e * f + two, dy: two.rem_euclid(2) as u8, res: BTreeMap::new() };
        }
        let (a, b) = (self.representative(), o.representative());
        let mut g = GroupRing::new();
        for (ca, &na) in &a {
            for (cb, &nb) in &b {
                gr_add_term(&mut g, ca.mul(cb), na * nb);
            }
        }
        Self::from_group_ring(&g)
    }

    pub fn to_json(&self) -> Value {
        let res: serde_json::Map<String, Value> = self.res.iter().map(|(p, r)| (p.to_string(), r.to_json())).collect();
        json!({"sig": self.sig, "dy": self.dy, "res": res})
    }

    pub fn from_json(v: &Value) -> Result<Self, Error> {
        if let Some(n) = v.as_i64() {
            return Ok(Self::from_int(n));
        }
        let bad = || Error::Parse(format!("bad Witt class {v}"));
        let sig = v.get("sig").and_then(Value::as_i64).ok_or_else(bad)?;
        let dy = v.get("dy").and_then(Value::as_u64).filter(|&d| d < 2).ok_or_else(bad)? as u8;
        let mut out = WittClassQ { sig, dy, res: BTreeMap::new() };
        if let Some(res) = v.get("res") {
            for (k, r) in res.as_object().ok_or_else(bad)? {
                let p: u64 = k.parse().map_err(|_| bad())?;
                if p < 3 || factorize(p)? != vec![(p, 1)] {
                    return Err(bad());
                }
                out.add_residue(WFpClass::from_json(p, r)?);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for WittClassQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.res.is_empty() {
            let x = self.sig - self.dy as i64;
            return match (self.dy, x) {
                (0, _) => write!(f, "{x}"),
                (_, 0) => write!(f, "<2>"),
                (_, x) if x > 0 => write!(f, "<2> + {x}"),
                (_, x) => write!(f, "<2> - {}", -x),
            };
        }
        let mut first = true;
        for (c, &n) in self.representative().iter().rev() {
            let (sign, n) = if n < 0 { ("-", -n) } else { ("+", n) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if n != 1 {
                write!(f, "{n}")?;
            }
            write!(f, "<{c}>")?;
        }
        Ok(())
    }
}

/// Element of Z[t_1..t_s]/(t_j^2 = 2 t_j); monomials are bitmasks over the variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TPoly {
    nvars: usize,
    coeffs: BTreeMap<u64, i64>,
}

impl TPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= 64);
        TPoly { nvars, coeffs: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: i64) -> Self {
        Self::monomial(nvars, 0, c)
    }

    pub fn monomial(nvars: usize, mask: u64, c: i64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(mask, c);
        p
    }

    /// t_j, with j counted from 1.
    pub fn t(nvars: usize, j: usize) -> Self {
        assert!(j >= 1 && j <= nvars);
        Self::monomial(nvars, 1 << (j - 1), 1)
    }

    /// u_j = 2 - t_j.
    pub fn u(nvars: usize, j: usize) -> Self {
        Self::constant(nvars, 2).sub(&Self::t(nvars, j))
    }

    /// Product of t_j over the variables in `mask`.
    pub fn t_set(nvars: usize, mask: u64) -> Self {
        Self::monomial(nvars, mask, 1)
    }

    /// Product of u_j over the variables in `mask`.
    pub fn u_set(nvars: usize, mask: u64) -> Self {
        let mut out = Self::constant(nvars, 1);
        for j in 0..nvars {
            if mask >> j & 1 == 1 {
                out = out.mul(&Self::u(nvars, j + 1));
            }
        }
        out
    }

    /// [w]_j: 1 + (w-1)/2 u_j for odd w, w/2 u_j for even w.
    pub fn bracket(nvars: usize, w: u64, j: usize) -> Self {
        let u = Self::u(nvars, j);
        if w % 2 == 1 {
            Self::constant(nvars, 1).add(&u.scale((w as i64 - 1) / 2))
        } else {
            u.scale(w as i64 / 2)
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn coeff(&self, mask: u64) -> i64 {
        self.coeffs.get(&mask).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_term(&mut self, mask: u64, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry(mask).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&mask);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in o.terms() {
            out.add_term(m, c);
        }
        out
    }

    pub fn add_assign(&mut self, o: &Self) {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        for (m, c) in o.terms() {
            self.add_term(m, c);
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1))
    }

    pub fn scale(&self, n: i64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in self.terms() {
            out.add_term(m, c * n);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut out = Self::zero(self.nvars);
        for (a, ca) in self.terms() {
            for (b, cb) in o.terms() {
                out.add_term(a | b, (ca * cb) << (a & b).count_ones());
            }
        }
        out
    }

    pub fn halve(&self) -> Result<Self, Error> {
        let mut out = Self::zero(self.nvars);
        for (m, c) in self.terms() {
            if c % 2 != 0 {
                return Err(Error::NotDivisible(c));
            }
            out.add_term(m, c / 2);
        }
        Ok(out)
    }

    /// Substitute t_j = 2 for delta_j = +1 and t_j = 0 for delta_j = -1.
    pub fn eval_signs(&self, signs: &[i8]) -> Result<i64, Error> {
        if signs.len() != self.nvars {
            return Err(Error::Arity { expected: self.nvars, got: signs.len() });
        }
        let mut neg = 0u64;
        for (j, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => neg |= 1 << j,
                _ => return Err(Error::Parse(format!("sign must be +1 or -1, got {s}"))),
            }
        }
        Ok(self.terms().filter(|(m, _)| m & neg == 0).map(|(m, c)| c << m.count_ones()).sum())
    }

    /// Substitute t_j = <2, 2 delta_j> and evaluate in W(Q).
    pub fn eval_wittq(&self, deltas: &[SquareClass]) -> Result<WittClassQ, Error> {
        if deltas.len() != self.nvars {
            return Err(Error::Arity { expected: self.nvars, got: deltas.len() });
        }
        let ts: Vec<WittClassQ> = deltas.iter().map(|d| WittClassQ::from_diag(&trace_form(d))).collect();
        let mut out = WittClassQ::zero();
        for (m, c) in self.terms() {
            let mut v = WittClassQ::from_int(c);
            for (j, t) in ts.iter().enumerate() {
                if m >> j & 1 == 1 {
                    v = v.mul(t);
                }
            }
            out = out.add(&v);
        }
        Ok(out)
    }

    /// Set t_j = 2 (delta_j = 1) and drop the variable, renumbering the later ones.
    pub fn specialize_split(&self, j: usize) -> Self {
        assert!(j >= 1 && j <= self.nvars);
        let bit = 1u64 << (j - 1);
        let low = bit - 1;
        let mut out = Self::zero(self.nvars - 1);
        for (m, c) in self.terms() {
            let c = if m & bit != 0 { 2 * c } else { c };
            let nm = (m & low) | ((m >> 1) & !low);
            out.add_term(nm, c);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms()
                .map(|(m, c)| {
                    let vars: Vec<usize> = (0..self.nvars).filter(|j| m >> j & 1 == 1).map(|j| j + 1).collect();
                    json!({"vars": vars, "c": c})
                })
                .collect(),
        )
    }

    pub fn from_json(nvars: usize, v: &Value) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("bad t-polynomial {v}"));
        let mut out = Self::zero(nvars);
        for term in v.as_array().ok_or_else(bad)? {
            let c = term.get("c").and_then(Value::as_i64).ok_or_else(bad)?;
            let mut mask = 0u64;
            for j in term.get("vars").and_then(Value::as_array).ok_or_else(bad)? {
                let j = j.as_u64().filter(|&j| j >= 1 && j as usize <= nvars).ok_or_else(bad)?;
                mask |= 1 << (j - 1);
            }
            out.add_term(mask, c);
        }
        Ok(out)
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // order by degree, then by mask
        let mut terms: Vec<(u64, i64)> = self.terms().collect();
        terms.sort_by_key(|&(m, _)| (m.count_ones(), m));
        for (m, c) in terms {
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0 { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            if m == 0 {
                write!(f, "{a}")?;
                continue;
            }
            if a != 1 {
                write!(f, "{a} ")?;
            }
            let vars: Vec<String> = (0..self.nvars).filter(|j| m >> j & 1 == 1).map(|j| format!("t{}", j + 1)).collect();
            write!(f, "{}", vars.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i64]) -> WittClassQ {
        WittClassQ::from_diag(&DiagonalForm::from_ints(v).unwrap())
    }

    #[test]
    fn hyperbolic_cancels() {
        assert_eq!(w(&[1, 1, -1]), WittClassQ::from_int(1));
    }

    #[test]
    fn three_has_residue() {
        let x = w(&[3]);
        assert_eq!((x.signature(), x.dyadic()), (1, 0));
        assert_eq!(x.residue(3), WFpClass::one(3));
        assert_eq!(x.ramified_primes(), vec![3]);
    }

    #[test]
    fn two_is_dyadic() {
        assert_eq!(w(&[2]), WittClassQ::two_class());
        assert_eq!(w(&[2, 2]), WittClassQ::from_int(2));
        assert_eq!(WittClassQ::two_class().add(&WittClassQ::two_class()), WittClassQ::from_int(2));
    }

    #[test]
    fn squares_of_rank_one() {
        assert_eq!(w(&[3]).mul(&w(&[3])), WittClassQ::from_int(1));
        assert_eq!(w(&[-35]).mul(&w(&[-35])), WittClassQ::from_int(1));
    }

    #[test]
    fn trace_forms() {
        let t = |d: i64| WittClassQ::from_diag(&trace_form(&SquareClass::from_int(d).unwrap()));
        assert_eq!(t(1), WittClassQ::from_int(2));
        assert_eq!(t(-1), WittClassQ::zero());
        let t3 = t(3);
        assert_eq!(t3, w(&[2, 6]));
        assert_eq!(t3.residue(3), WFpClass::of_unit(3, 2));
        assert_eq!(t3.residue(3), WFpClass::one(3).neg());
    }

    #[test]
    fn representative_round_trip() {
        for v in [vec![5], vec![5, 13], vec![-7, 10, 11], vec![2, 3, 5, 7, 13, 17], vec![26, -65, 3]] {
            let x = w(&v);
            assert_eq!(WittClassQ::from_group_ring(&x.representative()), x);
        }
    }

    #[test]
    fn fp_laws() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 37, 41] {
            let u = WFpClass::of_unit(p, non_residue(p));
            assert_eq!(u.mul(&u), WFpClass::one(p));
            let one = WFpClass::one(p);
            let order = (1..=4).find(|&k| one.scale(k).is_zero()).unwrap();
            assert_eq!(order, if p % 4 == 3 { 4 } else { 2 });
        }
    }

    #[test]
    fn factor_bound_is_enforced() {
        let r = factorize_with_bound(13 * 17, 10);
        assert!(matches!(r, Err(Error::FactorBound { .. })));
        assert_eq!(factorize(13 * 17).unwrap(), vec![(13, 1), (17, 1)]);
    }

    #[test]
    fn tpoly_rules() {
        let t1 = TPoly::t(1, 1);
        assert_eq!(t1.mul(&t1), t1.scale(2));
        assert!(t1.mul(&TPoly::u(1, 1)).is_zero());
        assert_eq!(t1.add(&TPoly::u(1, 1)).halve().unwrap(), TPoly::constant(1, 1));
        assert!(t1.halve().is_err());
        let three = TPoly::bracket(1, 3, 1);
        assert_eq!(three.eval_signs(&[-1]).unwrap(), 3);
        assert_eq!(three.eval_signs(&[1]).unwrap(), 1);
        assert_eq!(t1.sub(&TPoly::constant(1, 1)).eval_signs(&[-1]).unwrap(), -1);
        let t12 = TPoly::t(2, 1).mul(&TPoly::t(2, 2));
        assert_eq!(t12.eval_signs(&[1, 1]).unwrap(), 4);
        assert!(t12.eval_signs(&[1]).is_err());
    }

    #[test]
    fn tpoly_witt_eval() {
        let d3 = SquareClass::from_int(3).unwrap();
        let dm = SquareClass::from_int(-1).unwrap();
        assert_eq!(TPoly::t(1, 1).eval_wittq(&[d3]).unwrap(), w(&[2, 6]));
        assert_eq!(TPoly::t(1, 1).eval_wittq(std::slice::from_ref(&dm)).unwrap(), WittClassQ::zero());
        assert_eq!(TPoly::constant(1, 1).eval_wittq(&[dm]).unwrap(), WittClassQ::from_int(1));
    }

    #[test]
    fn bracket_multiplicative() {
        for a in 1..7u64 {
            for b in 1..7u64 {
                assert_eq!(TPoly::bracket(1, a, 1).mul(&TPoly::bracket(1, b, 1)), TPoly::bracket(1, a * b, 1));
            }
        }
    }

    #[test]
    fn specialize_drops_variable() {
        let p = TPoly::t(3, 2).mul(&TPoly::t(3, 3)).add(&TPoly::t(3, 1));
        let q = p.specialize_split(2);
        assert_eq!(q, TPoly::t(2, 2).scale(2).add(&TPoly::t(2, 1)));
    }
}
