//! Randomized properties shared by the proptest suites and the acceptance runner.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use wittwel::invariants::*;
use wittwel::witt::*;

pub const PRIMES: [i64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

/// Nonzero integers built from primes below 50, optionally times 4, with a sign.
pub fn entry() -> impl Strategy<Value = i64> {
    (any::<bool>(), proptest::collection::vec(0usize..PRIMES.len(), 0..3), any::<bool>()).prop_map(|(neg, ps, sq)| {
        let a: i64 = ps.iter().map(|&i| PRIMES[i]).product::<i64>() * if sq { 4 } else { 1 };
        if neg {
            -a
        } else {
            a
        }
    })
}

pub fn form(max: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(entry(), 0..=max)
}

pub fn class(f: &[i64]) -> WittClassQ {
    WittClassQ::from_diag(&DiagonalForm::from_ints(f).unwrap())
}

/// Small Witt classes: an integer plus a few rank-one forms.
pub fn witt_coeff() -> impl Strategy<Value = WittClassQ> {
    (-20i64..20, form(2)).prop_map(|(k, f)| WittClassQ::from_int(k).add(&class(&f)))
}

/// Degrees with m_1 <= 6 and, for two variables, m_2 <= 3.
pub fn degree() -> impl Strategy<Value = MultiDegree> {
    prop_oneof![(0usize..=13).prop_map(|n| vec![n]), (0usize..=13, 0usize..=7).prop_map(|(a, b)| vec![a, b])]
        .prop_map(MultiDegree::new)
}

pub fn int_invariant() -> impl Strategy<Value = BetaInvariant> {
    degree().prop_flat_map(|d| {
        let n = d.size();
        proptest::collection::vec(-1000i64..1000, n)
            .prop_map(move |c| BetaInvariant::from_ints(d.clone(), Basis::Beta, &c).unwrap())
    })
}

/// Witt-valued invariants; half of them have every signature removed.
pub fn witt_invariant() -> impl Strategy<Value = BetaInvariant> {
    (degree(), any::<bool>()).prop_flat_map(|(d, torsion)| {
        let n = d.size();
        proptest::collection::vec(witt_coeff(), n).prop_map(move |c| {
            let c = if torsion { c.iter().map(|w| w.sub(&WittClassQ::from_int(w.signature()))).collect() } else { c };
            BetaInvariant::from_witt(d.clone(), Basis::Beta, c).unwrap()
        })
    })
}

/// Witt classes of orthogonal sums and tensor products.
pub fn witt_homomorphism((f, g): (Vec<i64>, Vec<i64>)) -> Result<(), TestCaseError> {
    let fg: Vec<i64> = f.iter().chain(&g).copied().collect();
    let prod: Vec<i64> = f.iter().flat_map(|a| g.iter().map(move |b| a * b)).collect();
    prop_assert_eq!(class(&fg), class(&f).add(&class(&g)));
    prop_assert_eq!(class(&prod), class(&f).mul(&class(&g)));
    prop_assert_eq!(class(&f) == class(&g), super::witt_equivalent(&f, &g));
    Ok(())
}

fn binom(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

/// Multireal values straight from the definition w_s = sum_i b_i prod_j 2^{i_j} C(m_j - s_j, i_j).
pub fn multireal_oracle(d: &MultiDegree, b: &[i64]) -> Vec<i64> {
    let m = d.m();
    let idx = d.indices();
    idx.iter()
        .map(|s| {
            idx.iter()
                .zip(b)
                .map(|(i, c)| (0..m.len()).fold(*c, |acc, j| acc * (binom(m[j] - s[j], i[j]) << i[j])))
                .sum()
        })
        .collect()
}

/// Multireal values and back through the halving recursion.
pub fn triangle_round_trip(inv: BetaInvariant) -> Result<(), TestCaseError> {
    let b = inv.int_coeffs().unwrap();
    let w = multireal_from_beta_int(&inv).unwrap();
    prop_assert_eq!(&w, &multireal_oracle(&inv.degree, &b));
    prop_assert_eq!(beta_from_multireal(&inv.degree, &w).unwrap(), inv.clone());
    prop_assert_eq!(triangle_from_multireal(&inv.degree, &w).unwrap(), triangle_from_beta(&inv.degree, &b));
    Ok(())
}

/// A point of the algebra space: quadratic classes for every factor, truncated per degree.
pub fn algebra_points() -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::vec(proptest::collection::vec(entry(), 7), 2)
}

fn alg_for(d: &MultiDegree, pts: &[Vec<i64>]) -> EtaleAlgebraSpec {
    d.m()
        .iter()
        .zip(pts)
        .map(|(&m, p)| AlgFactor::Multiquadratic(p[..m].iter().map(|&x| SquareClass::from_int(x).unwrap()).collect()))
        .collect()
}

/// Splitting off E_delta and evaluating matches adjoining E_delta to factor j; at delta = +-1
/// this is the round and square cut.
pub fn split_cut_compatible((inv, j, pts, delta): (BetaInvariant, usize, Vec<Vec<i64>>, i64)) -> Result<(), TestCaseError> {
    let j = j % inv.degree.len();
    if inv.degree.n[j] < 2 {
        return Ok(());
    }
    let sp = split(&inv, j).unwrap();
    let mut small = inv.degree.clone();
    small.n[j] -= 2;
    let base = alg_for(&small, &pts);
    let at = |dl: i64| {
        let mut a = base.clone();
        a.push(AlgFactor::Multiquadratic(vec![SquareClass::from_int(dl).unwrap()]));
        eval_invariant(&sp, &a).unwrap()
    };
    let mut e = vec![0; inv.degree.len()];
    e[j] = 1;
    prop_assert_eq!(at(1), eval_invariant(&cut(&inv, &e, CutFlavor::Round).unwrap(), &base).unwrap());
    prop_assert_eq!(at(-1), eval_invariant(&cut(&inv, &e, CutFlavor::Square).unwrap(), &base).unwrap());
    let mut full = base.clone();
    if let AlgFactor::Multiquadratic(v) = &mut full[j] {
        v.push(SquareClass::from_int(delta).unwrap());
    }
    prop_assert_eq!(at(delta), eval_invariant(&inv, &full).unwrap());
    Ok(())
}

/// Torsion iff all multireal values have signature zero; torsion in W(Q) is killed by 4.
pub fn torsion_iff_signatures(inv: BetaInvariant) -> Result<(), TestCaseError> {
    let sigs_vanish = inv.degree.indices().iter().all(|s| {
        let alg: EtaleAlgebraSpec = s.iter().map(|&k| AlgFactor::Multireal(k)).collect();
        eval_invariant(&inv, &alg).unwrap().signature() == 0
    });
    let killed_by_4 = inv.coeffs().iter().all(|c| c.scale(4).is_zero());
    prop_assert_eq!(torsion_check(&inv), sigs_vanish);
    prop_assert_eq!(sigs_vanish, killed_by_4);
    Ok(())
}

/// Integral beta coefficients stay unramified in every basis.
pub fn integral_is_unramified((inv, k): (BetaInvariant, usize)) -> Result<(), TestCaseError> {
    let target = [Basis::Beta, Basis::Lambda, Basis::Alpha, Basis::Chi][k % 4];
    let x = convert_basis(&inv, target);
    prop_assert!(ramified_primes(&x).is_empty());
    prop_assert!(x.coeffs().iter().all(|c| c.ramified_primes().is_empty()));
    let back = convert_basis(&x, Basis::Beta);
    prop_assert_eq!(back.coeffs(), inv.coeffs());
    Ok(())
}
