use super::field::{Coins, Fe};
use super::MpcError;

/// One secret shared among `n` players: player `i` holds `g(alphas[i])`
/// for a polynomial `g` of degree at most `threshold` whose free term is
/// the secret.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareVector {
    pub modulus: u64,
    pub threshold: usize,
    pub alphas: Vec<Fe>,
    pub shares: Vec<Fe>,
}

impl ShareVector {
    pub fn n(&self) -> usize {
        self.shares.len()
    }

    fn same_session(&self, other: &ShareVector) -> bool {
        self.modulus == other.modulus && self.threshold == other.threshold && self.alphas == other.alphas
    }
}

/// Evaluation points `1, 2, ..., n`.
pub fn default_alphas(n: usize, modulus: u64) -> Result<Vec<Fe>, MpcError> {
    if n as u64 >= modulus {
        return Err(MpcError::FieldTooSmall { n, p: modulus });
    }
    Ok((1..=n as u64).map(|a| Fe::new(a, modulus)).collect())
}

/// Horner evaluation, coefficients in increasing degree.
pub fn eval_poly(coeffs: &[Fe], x: Fe) -> Fe {
    coeffs
        .iter()
        .rev()
        .fold(Fe::zero(x.modulus()), |acc, &c| acc * x + c)
}

/// Lagrange interpolation through `points`, evaluated at `x`.
pub fn interpolate_at(points: &[(Fe, Fe)], x: Fe) -> Fe {
    let p = x.modulus();
    let mut acc = Fe::zero(p);
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut num = Fe::one(p);
        let mut den = Fe::one(p);
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                num = num * (x - xj);
                den = den * (xi - xj);
            }
        }
        acc = acc + yi * num * den.inv().expect("evaluation points are distinct");
    }
    acc
}

/// Share `secret` at explicit evaluation points; also returns the dealt
/// polynomial's coefficients.
pub fn share_at(
    secret: Fe,
    threshold: usize,
    alphas: &[Fe],
    coins: &mut dyn Coins,
) -> Result<(ShareVector, Vec<Fe>), MpcError> {
    let p = secret.modulus();
    let mut coeffs = Vec::with_capacity(threshold + 1);
    coeffs.push(secret);
    for _ in 0..threshold {
        coeffs.push(coins.draw(p));
    }
    let shares = alphas.iter().map(|&a| eval_poly(&coeffs, a)).collect();
    Ok((
        ShareVector {
            modulus: p,
            threshold,
            alphas: alphas.to_vec(),
            shares,
        },
        coeffs,
    ))
}

/// Share `secret` among `n` players with a random degree-`threshold`
/// polynomial, at points `1..=n`.
pub fn share(secret: Fe, threshold: usize, n: usize, coins: &mut dyn Coins) -> Result<ShareVector, MpcError> {
    let alphas = default_alphas(n, secret.modulus())?;
    if threshold >= n {
        return Err(MpcError::TooFewShares {
            needed: threshold + 1,
            got: n,
        });
    }
    share_at(secret, threshold, &alphas, coins).map(|(v, _)| v)
}

/// Interpolate the free term from the shares of the players in `subset`.
/// Shares beyond the first `t + 1` must agree with the interpolant.
pub fn reconstruct(v: &ShareVector, subset: &[usize]) -> Result<Fe, MpcError> {
    let needed = v.threshold + 1;
    if subset.len() < needed {
        return Err(MpcError::TooFewShares {
            needed,
            got: subset.len(),
        });
    }
    let mut points = Vec::with_capacity(subset.len());
    for &i in subset {
        if i >= v.n() {
            return Err(MpcError::NoSuchShare(i));
        }
        points.push((v.alphas[i], v.shares[i]));
    }
    let (basis, extra) = points.split_at(needed);
    if extra.iter().any(|&(x, y)| interpolate_at(basis, x) != y) {
        return Err(MpcError::InconsistentShares(v.threshold));
    }
    Ok(interpolate_at(basis, Fe::zero(v.modulus)))
}

/// Local addition: each player adds its two shares.
pub fn add_shares(a: &ShareVector, b: &ShareVector) -> Result<ShareVector, MpcError> {
    if !a.same_session(b) {
        return Err(MpcError::MismatchedSession);
    }
    Ok(ShareVector {
        shares: a.shares.iter().zip(&b.shares).map(|(&x, &y)| x + y).collect(),
        ..a.clone()
    })
}
