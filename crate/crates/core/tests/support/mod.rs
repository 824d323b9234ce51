//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

pub mod props;

/// Genus-0 plane curve counts N_d through 3d - 1 points, by the WDVV recursion.
pub fn kontsevich(dmax: usize) -> Vec<i128> {
    fn c(n: i128, k: i128) -> i128 {
        if k < 0 || k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let mut n = vec![0i128; dmax + 1];
    if dmax >= 1 {
        n[1] = 1;
    }
    for d in 2..=dmax as i128 {
        let mut s = 0;
        for d1 in 1..d {
            let d2 = d - d1;
            s += n[d1 as usize] * n[d2 as usize] * d1 * d1 * d2 * (d2 * c(3 * d - 4, 3 * d1 - 2) - d1 * c(3 * d - 4, 3 * d1 - 1));
        }
        n[d as usize] = s;
    }
    n
}

// ---------------------------------------------------------------------------
// Classical invariants of rational quadratic forms (Hasse-Minkowski).

fn odd_part(mut a: i64, p: i64) -> (u32, i64) {
    let mut e = 0;
    while a % p == 0 {
        a /= p;
        e += 1;
    }
    (e, a)
}

fn legendre(a: i64, p: i64) -> i64 {
    let a = a.rem_euclid(p);
    let mut r = 1i64;
    let mut b = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Hilbert symbol (a, b)_p; p = 0 stands for the real place.
pub fn hilbert(a: i64, b: i64, p: i64) -> i64 {
    if p == 0 {
        return if a < 0 && b < 0 { -1 } else { 1 };
    }
    let (x, u) = odd_part(a, p);
    let (y, v) = odd_part(b, p);
    if p == 2 {
        let eps = |t: i64| ((t - 1) / 2).rem_euclid(2);
        let omega = |t: i64| ((t * t - 1) / 8).rem_euclid(2);
        let e = eps(u) * eps(v) + x as i64 * omega(v) + y as i64 * omega(u);
        return if e % 2 == 0 { 1 } else { -1 };
    }
    let mut r = if (x as i64 * y as i64 * (p - 1) / 2) % 2 == 0 { 1 } else { -1 };
    if y % 2 == 1 {
        r *= legendre(u, p);
    }
    if x % 2 == 1 {
        r *= legendre(v, p);
    }
    r
}

fn primes_of(a: i64) -> Vec<i64> {
    let mut a = a.abs();
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= a {
        if a % p == 0 {
            out.push(p);
            while a % p == 0 {
                a /= p;
            }
        }
        p += 1;
    }
    if a > 1 {
        out.push(a);
    }
    out
}

/// Rank, signature, discriminant sign and primes (squarefree part), and Hasse invariants
/// (as the set of places where it is -1): two forms of equal rank are isometric iff these agree.
pub fn classical_invariants(f: &[i64]) -> (usize, i64, i64, BTreeSet<i64>, Vec<i64>) {
    let sig = f.iter().map(|&a| a.signum()).sum();
    let mut disc_primes = BTreeSet::new();
    let mut disc_sign = 1;
    let mut places: BTreeSet<i64> = [0, 2].into_iter().collect();
    for &a in f {
        disc_sign *= a.signum();
        for p in primes_of(a) {
            places.insert(p);
            let (e, _) = odd_part(a, p);
            if e % 2 == 1 && !disc_primes.remove(&p) {
                disc_primes.insert(p);
            }
        }
    }
    let hasse = places
        .iter()
        .map(|&p| {
            let mut h = 1;
            for i in 0..f.len() {
                for j in i + 1..f.len() {
                    h *= hilbert(f[i], f[j], p);
                }
            }
            (p, h)
        })
        .filter(|&(_, h)| h == -1)
        .map(|(p, _)| p)
        .collect();
    (f.len(), sig, disc_sign, disc_primes, hasse)
}

/// Witt equivalence of two diagonal forms by padding with hyperbolic planes to equal rank
/// and comparing classical invariants.
pub fn witt_equivalent(f: &[i64], g: &[i64]) -> bool {
    if (f.len() + g.len()) % 2 == 1 {
        return false;
    }
    let (mut f, mut g) = (f.to_vec(), g.to_vec());
    while f.len() < g.len() {
        f.extend([1, -1]);
    }
    while g.len() < f.len() {
        g.extend([1, -1]);
    }
    classical_invariants(&f) == classical_invariants(&g)
}

/// Witt-trivial iff hyperbolic: the form plus enough planes matches the hyperbolic form.
pub fn witt_trivial(f: &[i64]) -> bool {
    witt_equivalent(f, &[])
}

// ---------------------------------------------------------------------------
// Brute-force floor diagrams and markings, grouped by isomorphism.

#[derive(Clone, Debug)]
pub struct Labeled {
    pub theta: Vec<u8>,
    /// (tail, head, weight)
    pub edges: Vec<(usize, usize, u8)>,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
}

fn spanning_trees(nv: usize) -> Vec<Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..nv).flat_map(|a| (a + 1..nv).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << all.len()) {
        if mask.count_ones() as usize + 1 != nv {
            continue;
        }
        let es: Vec<(usize, usize)> = (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i]).collect();
        let mut comp: Vec<usize> = (0..nv).collect();
        for &(a, b) in &es {
            let (ca, cb) = (comp[a], comp[b]);
            for c in comp.iter_mut() {
                if *c == cb {
                    *c = ca;
                }
            }
        }
        if comp.iter().all(|&c| c == comp[0]) {
            out.push(es);
        }
    }
    out
}

fn multisets(k: usize, nv: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in multisets(k - 1, nv) {
        let lo = rest.last().copied().unwrap_or(0);
        for v in lo..nv {
            let mut r = rest.clone();
            r.push(v);
            out.push(r);
        }
    }
    out
}

/// All vertex-labelled floor diagrams of the normalized class.
pub fn labeled_diagrams(d: [i64; 4]) -> Vec<Labeled> {
    let nv = (d[0] - d[1]) as usize;
    let nsrc = (d[0] - d[2] - d[3]) as usize;
    let nsnk = d[1] as usize;
    let mut out = Vec::new();
    for tree in spanning_trees(nv) {
        let ne = tree.len();
        for orient in 0u32..(1 << ne) {
            let mut weights = vec![1u8; ne];
            loop {
                let edges: Vec<(usize, usize, u8)> = tree
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b))| if orient >> i & 1 == 1 { (b, a, weights[i]) } else { (a, b, weights[i]) })
                    .collect();
                for theta_mask in 0u32..(1 << nv) {
                    if theta_mask.count_ones() as i64 != d[3] {
                        continue;
                    }
                    let theta: Vec<u8> = (0..nv).map(|v| (theta_mask >> v & 1) as u8).collect();
                    for sources in multisets(nsrc, nv) {
                        for sinks in multisets(nsnk, nv) {
                            let mut ones = 0;
                            let ok = (0..nv).all(|v| {
                                let inw: i64 = edges.iter().filter(|e| e.1 == v).map(|e| e.2 as i64).sum::<i64>()
                                    + sources.iter().filter(|&&x| x == v).count() as i64;
                                let outw: i64 = edges.iter().filter(|e| e.0 == v).map(|e| e.2 as i64).sum::<i64>()
                                    + sinks.iter().filter(|&&x| x == v).count() as i64;
                                let c = theta[v] as i64 + inw - outw;
                                ones += (c == 1) as i64;
                                c == 0 || c == 1
                            });
                            if ok && ones == d[0] - d[1] - d[2] {
                                out.push(Labeled {
                                    theta: theta.clone(),
                                    edges: edges.clone(),
                                    sources: sources.clone(),
                                    sinks: sinks.clone(),
                                });
                            }
                        }
                    }
                }
                // next weight vector
                let mut i = 0;
                while i < ne && weights[i] as i64 == d[0] {
                    weights[i] = 1;
                    i += 1;
                }
                if i == ne {
                    break;
                }
                weights[i] += 1;
            }
        }
    }
    out
}

/// Element descriptor: kind, endpoints, weight or theta.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Desc {
    V(usize, u8),
    E(usize, usize, u8),
    S(usize),
    K(usize),
}

fn elements(g: &Labeled) -> Vec<Desc> {
    let mut el: Vec<Desc> = g.theta.iter().enumerate().map(|(v, &t)| Desc::V(v, t)).collect();
    el.extend(g.edges.iter().map(|&(a, b, w)| Desc::E(a, b, w)));
    el.extend(g.sources.iter().map(|&v| Desc::S(v)));
    el.extend(g.sinks.iter().map(|&v| Desc::K(v)));
    el
}

/// Direct order relations x < y between element indices.
fn relations(el: &[Desc]) -> Vec<(usize, usize)> {
    let vidx = |v: usize| el.iter().position(|e| *e == Desc::V(v, 0) || *e == Desc::V(v, 1)).unwrap();
    let mut r = Vec::new();
    for (k, e) in el.iter().enumerate() {
        match *e {
            Desc::E(a, b, _) => {
                r.push((vidx(a), k));
                r.push((k, vidx(b)));
            }
            Desc::S(v) => r.push((k, vidx(v))),
            Desc::K(v) => r.push((vidx(v), k)),
            Desc::V(..) => {}
        }
    }
    r
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn relabel(d: Desc, pi: &[usize]) -> Desc {
    match d {
        Desc::V(v, t) => Desc::V(pi[v], t),
        Desc::E(a, b, w) => Desc::E(pi[a], pi[b], w),
        Desc::S(v) => Desc::S(pi[v]),
        Desc::K(v) => Desc::K(pi[v]),
    }
}

type Key = Vec<(usize, Desc)>;

fn key_under(el: &[Desc], phi: &[usize], pi: &[usize]) -> Key {
    let mut k: Key = el.iter().zip(phi).map(|(&e, &l)| (l, relabel(e, pi))).collect();
    k.sort();
    k
}

/// Equivalence classes of s-marked diagrams: (number of classes, number of essential classes).
pub fn marked_class_counts(d: [i64; 4], s: usize) -> (usize, usize) {
    let nv = (d[0] - d[1]) as usize;
    let perms = permutations(nv);
    let mut seen: BTreeSet<Key> = BTreeSet::new();
    let mut essential = 0;
    for g in labeled_diagrams(d) {
        let el = elements(&g);
        let n = el.len();
        let rel = relations(&el);
        // label of position p
        let label = |p: usize| if p < 2 * s { p / 2 + 1 } else { p - s + 1 };
        for order in permutations(n) {
            // order[p] = element at position p
            let mut phi = vec![0; n];
            for (p, &e) in order.iter().enumerate() {
                phi[e] = label(p);
            }
            if !rel.iter().all(|&(x, y)| phi[x] <= phi[y]) {
                continue;
            }
            let keys: Vec<Key> = perms.iter().map(|pi| key_under(&el, &phi, pi)).collect();
            let canon = keys.iter().min().unwrap().clone();
            if !seen.insert(canon) {
                continue;
            }
            // labels moved by some automorphism
            let base = key_under(&el, &phi, &(0..nv).collect::<Vec<_>>());
            let mut moved = BTreeSet::new();
            for (pi, k) in perms.iter().zip(&keys) {
                if *k != base {
                    continue;
                }
                for (x, &e) in el.iter().enumerate() {
                    if relabel(e, pi) != e {
                        moved.insert(phi[x]);
                    }
                }
            }
            for x in 0..n {
                for y in x + 1..n {
                    if el[x] == el[y] && phi[x] == phi[y] {
                        moved.insert(phi[x]);
                    }
                }
            }
            let ess = el.iter().zip(&phi).all(|(e, l)| match e {
                Desc::E(_, _, w) if w % 2 == 0 => moved.contains(l),
                _ => true,
            });
            essential += ess as usize;
        }
    }
    (seen.len(), essential)
}
