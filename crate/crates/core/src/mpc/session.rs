use serde::Serialize;

use super::field::{Coins, Fe};
use super::reduction::{reduction_matrix, ReductionMatrix};
use super::shamir::{default_alphas, interpolate_at, share_at, ShareVector};
use super::MpcError;

/// Something a player saw during a computation, in the order seen.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ViewEntry {
    /// The player's own input.
    Input { value: u64 },
    /// A random coefficient the player drew while dealing.
    Coin { value: u64 },
    /// A share or sub-share sent to the player.
    Received { from: usize, value: u64 },
    /// A value the player reconstructed as an output.
    Opened { value: u64 },
}

/// One honest execution among `n` curious players over secure channels.
pub struct Session {
    matrix: ReductionMatrix,
    views: Vec<Vec<ViewEntry>>,
}

impl Session {
    pub fn new(modulus: u64, n: usize, threshold: usize) -> Result<Session, MpcError> {
        let alphas = default_alphas(n, modulus)?;
        Ok(Session::with_matrix(reduction_matrix(&alphas, threshold, modulus)?))
    }

    pub fn with_matrix(matrix: ReductionMatrix) -> Session {
        let n = matrix.alphas.len();
        Session {
            matrix,
            views: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.alphas.len()
    }

    pub fn modulus(&self) -> u64 {
        self.matrix.modulus
    }

    pub fn threshold(&self) -> usize {
        self.matrix.threshold
    }

    pub fn matrix(&self) -> &ReductionMatrix {
        &self.matrix
    }

    pub fn views(&self) -> &[Vec<ViewEntry>] {
        &self.views
    }

    pub fn into_views(self) -> Vec<Vec<ViewEntry>> {
        self.views
    }

    pub fn record_input(&mut self, player: usize, value: Fe) {
        self.views[player].push(ViewEntry::Input { value: value.value() });
    }

    /// `dealer` shares `secret`; every player receives its share.
    pub fn deal(&mut self, dealer: usize, secret: Fe, coins: &mut dyn Coins) -> Result<ShareVector, MpcError> {
        let (sharing, coeffs) = share_at(secret, self.threshold(), &self.matrix.alphas, coins)?;
        self.views[dealer].extend(coeffs[1..].iter().map(|c| ViewEntry::Coin { value: c.value() }));
        for (player, share) in sharing.shares.iter().enumerate() {
            self.views[player].push(ViewEntry::Received {
                from: dealer,
                value: share.value(),
            });
        }
        Ok(sharing)
    }

    fn check(&self, v: &ShareVector) -> Result<(), MpcError> {
        if v.modulus != self.modulus() || v.threshold != self.threshold() || v.alphas != self.matrix.alphas {
            return Err(MpcError::MismatchedSession);
        }
        Ok(())
    }

    /// Every player in `to` collects all shares of `v` and interpolates.
    pub fn open(&mut self, v: &ShareVector, to: &[usize]) -> Result<Fe, MpcError> {
        self.check(v)?;
        let value = self.collect(&v.shares, v.threshold)?;
        for &player in to {
            for (from, share) in v.shares.iter().enumerate() {
                self.views[player].push(ViewEntry::Received {
                    from,
                    value: share.value(),
                });
            }
            self.views[player].push(ViewEntry::Opened { value: value.value() });
        }
        Ok(value)
    }

    fn collect(&self, shares: &[Fe], degree: usize) -> Result<Fe, MpcError> {
        let points: Vec<(Fe, Fe)> = self.matrix.alphas.iter().copied().zip(shares.iter().copied()).collect();
        let (basis, extra) = points.split_at(degree + 1);
        if extra.iter().any(|&(x, y)| interpolate_at(basis, x) != y) {
            return Err(MpcError::InconsistentShares(degree));
        }
        Ok(interpolate_at(basis, Fe::zero(self.modulus())))
    }

    /// Multiplication with degree reduction:
    ///
    /// 1. player j forms `g(alpha_j) = a_j * b_j` locally (degree 2t);
    /// 2. for every i, player j deals `c[i][j] * g(alpha_j)`;
    /// 3. player l sums the sub-shares it got for target i, which is its
    ///    share of `h(alpha_i)`, and sends it to player i;
    /// 4. player i interpolates `h(alpha_i)`, its new share.
    pub fn multiply(&mut self, a: &ShareVector, b: &ShareVector, coins: &mut dyn Coins) -> Result<ShareVector, MpcError> {
        self.check(a)?;
        self.check(b)?;
        let n = self.n();
        let p = self.modulus();
        let local: Vec<Fe> = a.shares.iter().zip(&b.shares).map(|(&x, &y)| x * y).collect();

        // sums[i][l]: player l's share of h(alpha_i).
        let mut sums = vec![vec![Fe::zero(p); n]; n];
        for (j, &g_j) in local.iter().enumerate() {
            for (i, row) in sums.iter_mut().enumerate() {
                let sub = self.deal(j, self.matrix.coefficient(i, j) * g_j, coins)?;
                for (l, s) in sub.shares.iter().enumerate() {
                    row[l] = row[l] + *s;
                }
            }
        }

        let mut shares = Vec::with_capacity(n);
        for (i, row) in sums.iter().enumerate() {
            for (l, s) in row.iter().enumerate() {
                self.views[i].push(ViewEntry::Received {
                    from: l,
                    value: s.value(),
                });
            }
            shares.push(self.collect(row, self.threshold())?);
        }
        Ok(ShareVector {
            shares,
            ..a.clone()
        })
    }
}
