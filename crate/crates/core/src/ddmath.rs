//! Double-double helpers on top of `twofloat`.

use twofloat::TwoFloat;

/// `(sin a, cos a)` to roughly double-double accuracy for moderate `|a|`.
///
/// The argument is halved until it is below 1/16, the Taylor series is summed
/// there, and the double-angle formulas undo the halving.
pub(crate) fn sin_cos(a: TwoFloat) -> (TwoFloat, TwoFloat) {
    let mut halvings = 0;
    let mut r = a;
    while r.hi().abs() > 0.0625 {
        r /= 2.0;
        halvings += 1;
    }
    let r2 = r * r;
    let mut term = r;
    let mut s = r;
    for k in 1..14 {
        term = -(term * r2) / (((2 * k) * (2 * k + 1)) as f64);
        s += term;
    }
    let mut term = TwoFloat::from(1.0);
    let mut c = TwoFloat::from(1.0);
    for k in 1..14 {
        term = -(term * r2) / (((2 * k - 1) * (2 * k)) as f64);
        c += term;
    }
    for _ in 0..halvings {
        let s2 = s * c * 2.0;
        let c2 = c * c - s * s;
        s = s2;
        c = c2;
    }
    (s, c)
}

/// `a / b` to double-double accuracy. The division operator of `TwoFloat`
/// between two double-double values only delivers double precision.
pub(crate) fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// `√a` for `a ≥ 0` by one Newton correction of the double square root.
pub(crate) fn sqrt(a: TwoFloat) -> TwoFloat {
    if a.hi() <= 0.0 {
        return TwoFloat::from(0.0);
    }
    let x = a.hi().sqrt();
    let r = a - TwoFloat::new_mul(x, x);
    TwoFloat::from(x) + r.hi() / (2.0 * x)
}

/// In-place LU factorization with partial pivoting of a row-major `n × n`
/// matrix. Returns the row permutation, or `None` on an exactly zero pivot.
pub(crate) fn lu_factor(a: &mut [TwoFloat], n: usize) -> Option<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .hi()
                    .abs()
                    .total_cmp(&a[j * n + col].hi().abs())
            })
            .unwrap();
        if a[pivot * n + col].hi() == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            perm.swap(col, pivot);
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = div(a[row * n + col], p);
            a[row * n + col] = f;
            if f.hi() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
        }
    }
    Some(perm)
}

/// Solves with the output of [`lu_factor`].
pub(crate) fn lu_solve(lu: &[TwoFloat], perm: &[usize], b: &[TwoFloat]) -> Vec<TwoFloat> {
    let n = perm.len();
    let mut y: Vec<TwoFloat> = perm.iter().map(|&p| b[p]).collect();
    for row in 0..n {
        let mut s = y[row];
        for k in 0..row {
            s -= lu[row * n + k] * y[k];
        }
        y[row] = s;
    }
    for row in (0..n).rev() {
        let mut s = y[row];
        for k in row + 1..n {
            s -= lu[row * n + k] * y[k];
        }
        y[row] = div(s, lu[row * n + row]);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_cos_identities() {
        for x in [0.0f64, 0.03, 0.7, 2.5, -4.9, 11.0] {
            let (s, c) = sin_cos(TwoFloat::from(x));
            assert!((s.hi() - x.sin()).abs() < 1e-15);
            assert!((c.hi() - x.cos()).abs() < 1e-15);
            let one = s * s + c * c - 1.0;
            assert!(one.hi().abs() < 1e-29);
        }
        // sin(π/6) = 1/2 with π/6 carried in double-double
        let (s, _) = sin_cos(twofloat::consts::PI / 6.0);
        assert!((s - 0.5).hi().abs() < 1e-30);
    }

    #[test]
    fn division_and_root() {
        let third = div(TwoFloat::from(1.0), TwoFloat::from(3.0));
        assert!((third * 3.0 - 1.0).hi().abs() < 1e-31);
        let a = TwoFloat::new_add(2.0, 1e-20);
        let q = div(a, TwoFloat::new_add(7.0, -3e-19));
        assert!((q * TwoFloat::new_add(7.0, -3e-19) - a).hi().abs() < 1e-31);
        let r = sqrt(TwoFloat::from(2.0));
        assert!((r * r - 2.0).hi().abs() < 1e-31);
    }

    #[test]
    fn dense_solve() {
        let n = 3;
        let mut a: Vec<TwoFloat> = [4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&v| TwoFloat::from(v))
            .collect();
        let b: Vec<TwoFloat> = [1.0, 2.0, 3.0].iter().map(|&v| TwoFloat::from(v)).collect();
        let perm = lu_factor(&mut a, n).unwrap();
        let b = lu_solve(&a, &perm, &b);
        let a0 = [4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        for i in 0..n {
            let mut r = TwoFloat::from(-[1.0, 2.0, 3.0][i]);
            for k in 0..n {
                r += b[k] * a0[i * n + k];
            }
            assert!(r.hi().abs() < 1e-30);
        }
    }
}
