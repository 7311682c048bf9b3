//! Exact rank and interpolation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::polyring::Poly;
use crate::scalar::{Rational, Scalar};

/// Rank by Gaussian elimination over a field.
pub fn rank<S: Scalar>(rows: &[Vec<S>]) -> usize {
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let cols = m.iter().map(Vec::len).max().unwrap_or(0);
    for r in &mut m {
        r.resize(cols, S::zero());
    }
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in rank + 1..m.len() {
            if m[r][c].is_zero() {
                continue;
            }
            let factor = m[r][c].clone() / pivot.clone();
            for k in c..cols {
                let sub = factor.clone() * m[rank][k].clone();
                m[r][k] = m[r][k].clone() - sub;
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of a rational matrix by fraction-free (Bareiss) elimination: rows are
/// cleared of denominators and every intermediate entry stays an integer.
pub fn rank_fraction_free(rows: &[Vec<Rational>]) -> usize {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let mut out: Vec<BigInt> = row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
            out.resize(cols, BigInt::zero());
            out
        })
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            for k in c + 1..cols {
                let v = &m[rank][c] * &m[r][k] - &m[r][c] * &m[rank][k];
                // Exact by Sylvester's identity.
                m[r][k] = v / &prev;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Univariate polynomial in generator `var` through the points
/// `(xs[i], ys[i])`; the `xs` must be pairwise distinct.
pub fn lagrange<S: Scalar>(var: usize, xs: &[S], ys: &[S]) -> Poly<S> {
    assert_eq!(xs.len(), ys.len(), "lagrange: length mismatch");
    let x = Poly::<S>::var(var);
    let mut acc = Poly::zero();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = Poly::constant(yi.clone());
        for (j, xj) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            let denom = xi.clone() - xj.clone();
            assert!(!denom.is_zero(), "lagrange: repeated node");
            let factor = &x - &Poly::constant(xj.clone());
            basis = (&basis * &factor).scale(&(S::one() / denom));
        }
        acc = &acc + &basis;
    }
    acc
}
