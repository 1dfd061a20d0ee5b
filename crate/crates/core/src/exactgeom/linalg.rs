//! Dense exact Gaussian elimination: rref, nullspaces, square solves.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Vector;
use crate::scalar::Rational;

/// Reduced row echelon form in place; returns pivot column indices.
pub fn rref(m: &mut Vec<Vector>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] = &m[i][j] - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of {x : rows · x = 0} in dimension `cols`.
pub fn nullspace(rows: &[Vector], cols: usize) -> Vec<Vector> {
    let mut m: Vec<Vector> = rows.to_vec();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[ri][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Rank of the row set.
pub fn rank(rows: &[Vector]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Solves the square system `a x = b`; None when singular.
pub fn solve_square(a: &[Vector], b: &[Rational]) -> Option<Vector> {
    let n = a.len();
    let mut m: Vec<Vector> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    Some((0..n).map(|i| m[i][n].clone()).collect())
}

/// Determinant of a square matrix.
pub fn det(a: &[Vector]) -> Rational {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rational::zero();
        };
        if pr != c {
            m.swap(c, pr);
            d = -d;
        }
        d *= m[c][c].clone();
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if !m[i][c].is_zero() {
                let f = &m[i][c] * &inv;
                for j in c..n {
                    let t = &m[c][j] * &f;
                    m[i][j] = &m[i][j] - t;
                }
            }
        }
    }
    d
}

/// Scales a rational vector to the unique primitive integer vector with the
/// same direction and a positive first nonzero entry.
pub fn primitive(v: &[Rational]) -> Vector {
    let mut denom_lcm = BigInt::one();
    for x in v {
        denom_lcm = denom_lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&denom_lcm / x.denom()))
        .collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    let flip = ints.iter().find(|x| !x.is_zero()).map(|x| x.is_negative()) == Some(true);
    ints.into_iter()
        .map(|x| {
            let mut q = x / &g;
            if flip {
                q = -q;
            }
            Rational::from_integer(q)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn nullspace_plane() {
        // x + y + z = 0 has a 2-dim nullspace
        let rows = vec![vec![rat_int(1), rat_int(1), rat_int(1)]];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(super::super::dot(&rows[0], v).is_zero());
        }
    }

    #[test]
    fn solve_and_det() {
        let a = vec![
            vec![rat_int(2), rat_int(1)],
            vec![rat_int(1), rat_int(3)],
        ];
        let x = solve_square(&a, &[rat_int(5), rat_int(10)]).unwrap();
        assert_eq!(x, vec![rat_int(1), rat_int(3)]);
        assert_eq!(det(&a), rat_int(5));
    }

    #[test]
    fn primitive_scaling() {
        assert_eq!(
            primitive(&[rat(-2, 3), rat(4, 3)]),
            vec![rat_int(1), rat_int(-2)]
        );
    }

    use num_traits::Zero;
}
