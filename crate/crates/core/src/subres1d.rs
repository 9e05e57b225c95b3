//! One-dimensional subresolution basis and interface correction coefficients.
//!
//! On [0, 1] with subcell nodes 0 = n_0 < n_1 < ... < n_{k+1} = 1, phi_m is
//! the L2 projection onto degree-k polynomials of the indicator of the m-th
//! subcell. Its monomial coefficients solve a Hilbert-matrix moment system.
//! The interface coefficient C^(m) = sum of phi_p(0) over p > m admits the
//! closed form 1 - (n_m, n_m^2, ..., n_m^{k+1}) . B with B = Lambda H^{-1} e1.
//!
//! The Hilbert system is solved by Gaussian elimination with partial pivoting
//! in exact rational arithmetic: the input nodes convert exactly from their
//! binary floating-point values, so C^(0) = 1 and C^(k+1) = 0 come out exact
//! rather than drowned in the Hilbert matrix's conditioning.

use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

type Q = BigRational;

fn q(n: i64) -> Q {
    Q::from_i64(n).expect("small integer")
}

fn q_from(x: f64) -> Q {
    Q::from_f64(x).expect("finite float")
}

fn validate_nodes(k: usize, nodes: &[f64]) -> Result<()> {
    if k > 9 {
        return Err(Error::IllConditioned(format!(
            "1D subresolution limited to k <= 9, got {k}"
        )));
    }
    if nodes.len() != k + 2 {
        return Err(Error::InvalidNodes(format!(
            "expected {} nodes for k = {k}, got {}",
            k + 2,
            nodes.len()
        )));
    }
    if nodes[0] != 0.0 || nodes[k + 1] != 1.0 {
        return Err(Error::InvalidNodes("node set must start at 0 and end at 1".into()));
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidNodes("nodes must be strictly increasing".into()));
    }
    Ok(())
}

/// Exact Gaussian elimination with partial pivoting; `rhs` holds one
/// right-hand side per column.
fn solve_exact(mut a: Vec<Vec<Q>>, mut rhs: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let n = a.len();
    let n_rhs = rhs[0].len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().cmp(&a[j][col].abs()))
            .expect("nonempty pivot range");
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        assert!(!a[col][col].is_zero(), "Hilbert system is nonsingular");
        for row in col + 1..n {
            let factor = &a[row][col] / &a[col][col];
            for j in col..n {
                let t = &factor * &a[col][j];
                a[row][j] -= t;
            }
            for j in 0..n_rhs {
                let t = &factor * &rhs[col][j];
                rhs[row][j] -= t;
            }
        }
    }
    let mut x = vec![vec![Q::zero(); n_rhs]; n];
    for row in (0..n).rev() {
        for j in 0..n_rhs {
            let mut acc = rhs[row][j].clone();
            for col in row + 1..n {
                acc -= &a[row][col] * &x[col][j];
            }
            x[row][j] = acc / &a[row][row];
        }
    }
    x
}

fn hilbert(n: usize) -> Vec<Vec<Q>> {
    (0..n)
        .map(|i| (0..n).map(|j| Q::one() / q((i + j + 1) as i64)).collect())
        .collect()
}

/// Exact monomial coefficients of phi_1..phi_{k+1}, ascending powers.
fn phi_coeffs_exact(k: usize, nodes: &[f64]) -> Vec<Vec<Q>> {
    let n = k + 1;
    let nq: Vec<Q> = nodes.iter().map(|&x| q_from(x)).collect();
    // Moment equations: sum_p a_p / (p + j + 1) = (n_m^{j+1} - n_{m-1}^{j+1}) / (j + 1).
    let mut rhs = vec![vec![Q::zero(); n]; n];
    for (j, row) in rhs.iter_mut().enumerate() {
        for (m, slot) in row.iter_mut().enumerate() {
            let hi = pow(&nq[m + 1], j + 1);
            let lo = pow(&nq[m], j + 1);
            *slot = (hi - lo) / q((j + 1) as i64);
        }
    }
    let sol = solve_exact(hilbert(n), rhs);
    // Column m of the solution holds phi_{m+1}'s coefficients.
    (0..n).map(|m| (0..n).map(|p| sol[p][m].clone()).collect()).collect()
}

fn pow(x: &Q, e: usize) -> Q {
    let mut acc = Q::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Monomial coefficient table of the 1D subresolution basis: row m holds the
/// ascending-power coefficients of phi_{m+1}.
pub fn subres_1d_basis(k: usize, nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
    validate_nodes(k, nodes)?;
    Ok(phi_coeffs_exact(k, nodes)
        .into_iter()
        .map(|row| row.iter().map(|c| c.to_f64().expect("finite coefficient")).collect())
        .collect())
}

fn correction_exact(k: usize, nodes: &[f64]) -> Vec<Q> {
    let n = k + 1;
    let nq: Vec<Q> = nodes.iter().map(|&x| q_from(x)).collect();
    // B = Lambda H^{-1} e1 with Lambda_j = 1/(j+1).
    let mut e1 = vec![vec![Q::zero(); 1]; n];
    e1[0][0] = Q::one();
    let x = solve_exact(hilbert(n), e1);
    let b: Vec<Q> = (0..n).map(|j| &x[j][0] / q((j + 1) as i64)).collect();
    (0..=k + 1)
        .map(|m| {
            let dot: Q = (0..n).map(|j| &b[j] * pow(&nq[m], j + 1)).sum();
            Q::one() - dot
        })
        .collect()
}

/// Interface correction coefficients C^(0)..C^(k+1) at the left ends of the
/// subcells, from the closed form. C^(0) = 1 and C^(k+1) = 0 exactly.
pub fn correction_coeffs_1d(k: usize, nodes: &[f64]) -> Result<Vec<f64>> {
    validate_nodes(k, nodes)?;
    Ok(correction_exact(k, nodes)
        .iter()
        .map(|c| c.to_f64().expect("finite coefficient"))
        .collect())
}

/// Same coefficients from the defining sum C^(m) = sum_{p > m} phi_p(0);
/// serves as an independent oracle for the closed form.
pub fn correction_coeffs_1d_from_basis(k: usize, nodes: &[f64]) -> Result<Vec<f64>> {
    validate_nodes(k, nodes)?;
    let phi = phi_coeffs_exact(k, nodes);
    Ok((0..=k + 1)
        .map(|m| {
            let acc: Q = phi.iter().skip(m).map(|row| row[0].clone()).sum();
            acc.to_f64().expect("finite coefficient")
        })
        .collect())
}
