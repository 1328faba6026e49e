use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorRole {
    Position,
    Momentum,
    Hamiltonian,
}

/// Dense complex operator in the truncated number basis `|0>, …, |N−1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub role: OperatorRole,
    pub data: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// `max |M_ij − conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.data - self.data.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn lowering(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Truncated `q = √(ħ/2mω)(A + A†)` and `p = i√(ħmω/2)(A† − A)`.
pub fn build_qp_matrices(
    n: usize,
    m: f64,
    omega: f64,
    hbar: f64,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if n < 2 {
        return Err(invalid("N", format!("need at least 2 levels, got {n}")));
    }
    for (name, x) in [("m", m), ("omega", omega), ("hbar", hbar)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(name, format!("must be finite and > 0, got {x}")));
        }
    }
    let a = lowering(n);
    let ad = a.adjoint();
    let xs = (hbar / (2.0 * m * omega)).sqrt();
    let ps = (hbar * m * omega / 2.0).sqrt();
    let q = (&a + &ad) * Complex64::new(xs, 0.0);
    let p = (&ad - &a) * Complex64::new(0.0, ps);
    Ok((
        OperatorMatrix {
            role: OperatorRole::Position,
            data: q,
        },
        OperatorMatrix {
            role: OperatorRole::Momentum,
            data: p,
        },
    ))
}

fn same_dims(q: &OperatorMatrix, p: &OperatorMatrix) -> Result<()> {
    if q.data.shape() != p.data.shape() || q.data.nrows() != q.data.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "q is {:?}, p is {:?}",
            q.data.shape(),
            p.data.shape()
        )));
    }
    Ok(())
}

/// How far the truncated `qp − pq` is from `iħ·I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorReport {
    /// `max |(qp − pq)_jj − iħ|` over `j < N−1`, together with every off-diagonal magnitude.
    pub max_defect: f64,
    /// `(qp − pq)` at `(N−1, N−1)`; equals `−iħ(N−1)` for the ladder construction.
    pub corner: Complex64,
    /// `max |(pq − qp)_jj − ħ|` over `j < N−1`: the reversed order read as a real `ħ`.
    pub reversed_real_defect: f64,
    /// `max ||(pq − qp)_jj| − ħ|` over `j < N−1`: the same, up to a phase.
    pub reversed_magnitude_defect: f64,
}

pub fn commutator_defect(
    q: &OperatorMatrix,
    p: &OperatorMatrix,
    hbar: f64,
) -> Result<CommutatorReport> {
    same_dims(q, p)?;
    let n = q.dim();
    let c = &q.data * &p.data - &p.data * &q.data;
    let target = Complex64::new(0.0, hbar);
    let mut max_defect: f64 = 0.0;
    let mut real_defect: f64 = 0.0;
    let mut mag_defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max_defect = max_defect.max(c[(i, j)].norm());
            } else if i < n - 1 {
                max_defect = max_defect.max((c[(i, i)] - target).norm());
                let reversed = -c[(i, i)];
                real_defect = real_defect.max((reversed - Complex64::new(hbar, 0.0)).norm());
                mag_defect = mag_defect.max((reversed.norm() - hbar).abs());
            }
        }
    }
    Ok(CommutatorReport {
        max_defect,
        corner: c[(n - 1, n - 1)],
        reversed_real_defect: real_defect,
        reversed_magnitude_defect: mag_defect,
    })
}

/// `H = p²/2m + ½ m ω² q²` from the given matrices.
pub fn hamiltonian(
    q: &OperatorMatrix,
    p: &OperatorMatrix,
    m: f64,
    omega: f64,
) -> Result<OperatorMatrix> {
    same_dims(q, p)?;
    let p2 = &p.data * &p.data;
    let q2 = &q.data * &q.data;
    let h = p2 * Complex64::new(0.5 / m, 0.0) + q2 * Complex64::new(0.5 * m * omega * omega, 0.0);
    Ok(OperatorMatrix {
        role: OperatorRole::Hamiltonian,
        data: h,
    })
}

/// Compression of the full oscillator Hamiltonian onto the first `n` levels.
///
/// Products of truncated `q`, `p` lose the `A A†` contribution on the last
/// level, so the operators are built one level larger and the leading block is
/// kept. The result is `diag(ħω(j + ½))` up to rounding.
pub fn projected_hamiltonian(n: usize, m: f64, omega: f64, hbar: f64) -> Result<OperatorMatrix> {
    let (q, p) = build_qp_matrices(n + 1, m, omega, hbar)?;
    let h = hamiltonian(&q, &p, m, omega)?;
    Ok(OperatorMatrix {
        role: OperatorRole::Hamiltonian,
        data: h.data.view((0, 0), (n, n)).into_owned(),
    })
}

/// Eigenvalues of a Hermitian operator in ascending order.
pub fn spectrum(h: &OperatorMatrix) -> Vec<f64> {
    let hermitian = (&h.data + h.data.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = hermitian.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest eigenvalue of `p²/2m + ½ m ω² q²`.
pub fn ground_energy(q: &OperatorMatrix, p: &OperatorMatrix, m: f64, omega: f64) -> Result<f64> {
    let h = hamiltonian(q, p, m, omega)?;
    Ok(spectrum(&h)[0])
}
