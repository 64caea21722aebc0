use super::field::{Coins, Fe};
use super::session::Session;
use super::shamir::ShareVector;
use super::MpcError;

/// Public matrix taking the evaluations `a_j = g(alpha_j)` of a polynomial
/// of degree at most 2t to the evaluations `b_i = h(alpha_i)` of its
/// truncation to degree t: `h(alpha_i) = sum_j c[i][j] * g(alpha_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionMatrix {
    pub modulus: u64,
    pub threshold: usize,
    pub alphas: Vec<Fe>,
    pub entries: Vec<Vec<Fe>>,
}

impl ReductionMatrix {
    pub fn apply(&self, evaluations: &[Fe]) -> Vec<Fe> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(evaluations)
                    .fold(Fe::zero(self.modulus), |acc, (&c, &g)| acc + c * g)
            })
            .collect()
    }

    pub fn coefficient(&self, i: usize, j: usize) -> Fe {
        self.entries[i][j]
    }
}

fn invert(mut m: Vec<Vec<Fe>>, modulus: u64) -> Option<Vec<Vec<Fe>>> {
    let n = m.len();
    let mut inv: Vec<Vec<Fe>> = (0..n)
        .map(|i| (0..n).map(|j| Fe::new(u64::from(i == j), modulus)).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = m[col][col].inv()?;
        for k in 0..n {
            m[col][k] = m[col][k] * scale;
            inv[col][k] = inv[col][k] * scale;
        }
        for r in (0..n).filter(|&r| r != col) {
            let factor = m[r][col];
            if factor.is_zero() {
                continue;
            }
            for k in 0..n {
                m[r][k] = m[r][k] - factor * m[col][k];
                inv[r][k] = inv[r][k] - factor * inv[col][k];
            }
        }
    }
    Some(inv)
}

/// `C = V * P_t * V^-1` where `V` is the Vandermonde matrix of `alphas`
/// and `P_t` keeps coefficients of degree `<= t`.
pub fn reduction_matrix(alphas: &[Fe], threshold: usize, modulus: u64) -> Result<ReductionMatrix, MpcError> {
    let n = alphas.len();
    if 2 * threshold >= n {
        return Err(MpcError::DegreeTooHigh { t: threshold, n });
    }
    let vandermonde: Vec<Vec<Fe>> = alphas
        .iter()
        .map(|&a| (0..n as u64).map(|k| a.pow(k)).collect())
        .collect();
    let inverse = invert(vandermonde.clone(), modulus)
        .ok_or_else(|| MpcError::InvalidCircuit("evaluation points are not distinct".into()))?;
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..=threshold).fold(Fe::zero(modulus), |acc, k| acc + vandermonde[i][k] * inverse[k][j])
                })
                .collect()
        })
        .collect();
    Ok(ReductionMatrix {
        modulus,
        threshold,
        alphas: alphas.to_vec(),
        entries,
    })
}

/// Multiply two sharings with the honest degree-reduction sub-protocol.
pub fn mul_with_reduction(
    a: &ShareVector,
    b: &ShareVector,
    matrix: &ReductionMatrix,
    coins: &mut dyn Coins,
) -> Result<ShareVector, MpcError> {
    let mut session = Session::with_matrix(matrix.clone());
    session.multiply(a, b, coins)
}
