//! Linear stability of mean-field equilibria.
//!
//! The Jacobian is taken by central differences on the conservation hyperplane: the first
//! dynamic mode absorbs every perturbation of the others, so the conserved direction and
//! the frozen modes never show up as spurious zero eigenvalues. Stability is then decided
//! twice, from the eigenvalues and from the Routh–Hurwitz conditions on the
//! characteristic polynomial, and the two verdicts must agree.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::meanfield::{MeanFieldSystem, OccupancyVector};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct StabilityReport<T> {
    pub stable: bool,
    /// Reduced Jacobian, row-major.
    pub jacobian: Vec<Vec<T>>,
    pub eigenvalues: Vec<Complex<f64>>,
    pub routh_hurwitz: RouthHurwitz<T>,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouthHurwitz<T> {
    /// Monic characteristic polynomial, highest degree first.
    pub coefficients: Vec<T>,
    pub first_column: Vec<T>,
    pub stable: bool,
}

/// Jacobian of `system` at `state`, reduced by conservation.
pub fn reduced_jacobian<T: Scalar, S: MeanFieldSystem<T> + ?Sized>(
    system: &S,
    state: &OccupancyVector<T>,
) -> Result<Vec<Vec<T>>> {
    let modes = system.dynamic_modes();
    let Some((&eliminated, free)) = modes.split_first() else {
        return Ok(Vec::new());
    };
    let rel = T::lit(1e-6).max(T::epsilon().sqrt());
    let m = free.len();
    let mut jac = vec![vec![T::zero(); m]; m];
    for (j, &mode) in free.iter().enumerate() {
        let h = rel * state.get(mode).abs().max(T::one());
        let shifted = |sign: T| {
            let mut s = *state;
            s.set(mode, state.get(mode) + sign * h);
            s.set(eliminated, state.get(eliminated) - sign * h);
            s
        };
        let plus = system.rhs(&shifted(T::one()))?;
        let minus = system.rhs(&shifted(-T::one()))?;
        for (i, &row) in free.iter().enumerate() {
            jac[i][j] = (plus.get(row) - minus.get(row)) / (T::lit(2.0) * h);
        }
    }
    Ok(jac)
}

/// Monic characteristic polynomial `det(sI − A)` by Faddeev–LeVerrier, highest degree first.
pub fn characteristic_polynomial<T: Scalar>(a: &[Vec<T>]) -> Vec<T> {
    let n = a.len();
    let mut coeffs = vec![T::one()];
    let mut m = vec![vec![T::zero(); n]; n];
    let mut c = T::one();
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = T::zero();
                for (l, row) in m.iter().enumerate() {
                    acc += a[i][l] * row[j];
                }
                next[i][j] = acc;
            }
            next[i][i] += c;
        }
        m = next;
        // c_k = −tr(A M_k) / k
        let mut trace = T::zero();
        for i in 0..n {
            for (l, row) in m.iter().enumerate() {
                trace += a[i][l] * row[i];
            }
        }
        c = -trace / T::from_count(k);
        coeffs.push(c);
    }
    coeffs
}

/// Routh array test: every root has negative real part iff the first column is
/// strictly positive (for a polynomial with positive leading coefficient).
pub fn routh_hurwitz<T: Scalar>(coefficients: &[T]) -> RouthHurwitz<T> {
    let degree = coefficients.len().saturating_sub(1);
    let width = degree / 2 + 1;
    let mut rows: Vec<Vec<T>> = (0..2)
        .map(|r| {
            (0..width)
                .map(|j| coefficients.get(2 * j + r).copied().unwrap_or(T::zero()))
                .collect()
        })
        .collect();
    let mut stable = coefficients.first().is_some_and(|&c| c > T::zero());
    for r in 2..=degree {
        let (a, b) = (&rows[r - 2], &rows[r - 1]);
        if b[0] == T::zero() {
            stable = false;
            break;
        }
        let row = (0..width)
            .map(|j| {
                let a_next = a.get(j + 1).copied().unwrap_or(T::zero());
                let b_next = b.get(j + 1).copied().unwrap_or(T::zero());
                (b[0] * a_next - a[0] * b_next) / b[0]
            })
            .collect();
        rows.push(row);
    }
    let first_column: Vec<T> = rows.iter().take(degree + 1).map(|r| r[0]).collect();
    stable = stable && first_column.len() == degree + 1 && first_column.iter().all(|&v| v > T::zero());
    RouthHurwitz {
        coefficients: coefficients.to_vec(),
        first_column,
        stable,
    }
}

fn residual_tolerance<T: Scalar>(state: &OccupancyVector<T>) -> T {
    T::lit(1e-8).max(T::lit(1e3) * T::epsilon() * state.max_abs().max(T::one()))
}

/// Decides whether `steady` is a locally asymptotically stable equilibrium of `system`.
pub fn stability_check<T: Scalar, S: MeanFieldSystem<T> + ?Sized>(
    system: &S,
    steady: &OccupancyVector<T>,
) -> Result<StabilityReport<T>> {
    let residual = system.rhs(steady)?.max_abs();
    if !(residual <= residual_tolerance(steady)) {
        return Err(Error::Precondition(format!(
            "state is not an equilibrium: ‖rhs‖∞ = {residual}"
        )));
    }
    let jacobian = reduced_jacobian(system, steady)?;
    let m = jacobian.len();
    let flat: Vec<f64> = jacobian.iter().flatten().map(|v| v.to_f64_lossy()).collect();
    let eigenvalues: Vec<Complex<f64>> = if m == 0 {
        Vec::new()
    } else {
        DMatrix::from_row_slice(m, m, &flat)
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect()
    };
    let eig_stable = eigenvalues.iter().all(|z| z.re < 0.0);
    let rh = routh_hurwitz(&characteristic_polynomial(&jacobian));
    let evidence = format!(
        "reduced Jacobian {m}x{m}; eigenvalues [{}]; Routh-Hurwitz first column [{}]",
        eigenvalues
            .iter()
            .map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im))
            .collect::<Vec<_>>()
            .join(", "),
        rh.first_column
            .iter()
            .map(|v| format!("{:.6e}", v.to_f64_lossy()))
            .collect::<Vec<_>>()
            .join(", "),
    );
    if eig_stable != rh.stable {
        return Err(Error::StabilityDisagreement(evidence));
    }
    Ok(StabilityReport {
        stable: eig_stable,
        jacobian,
        eigenvalues,
        routh_hurwitz: rh,
        evidence,
    })
}
