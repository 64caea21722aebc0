use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::MpcError;

/// Element of GF(p).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe {
    value: u64,
    modulus: u64,
}

impl Fe {
    pub fn new(value: u64, modulus: u64) -> Fe {
        Fe {
            value: value % modulus,
            modulus,
        }
    }

    pub fn zero(modulus: u64) -> Fe {
        Fe { value: 0, modulus }
    }

    pub fn one(modulus: u64) -> Fe {
        Fe::new(1, modulus)
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn pow(self, mut exp: u64) -> Fe {
        let mut base = self;
        let mut acc = Fe::one(self.modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; the modulus must be prime.
    pub fn inv(self) -> Option<Fe> {
        (!self.is_zero()).then(|| self.pow(self.modulus - 2))
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for Fe {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u64(self.value)
    }
}

impl Add for Fe {
    type Output = Fe;
    fn add(self, rhs: Fe) -> Fe {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Fe::new(self.value + rhs.value, self.modulus)
    }
}

impl Sub for Fe {
    type Output = Fe;
    fn sub(self, rhs: Fe) -> Fe {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Fe::new(self.value + self.modulus - rhs.value, self.modulus)
    }
}

impl Neg for Fe {
    type Output = Fe;
    fn neg(self) -> Fe {
        Fe::new(self.modulus - self.value, self.modulus)
    }
}

impl Mul for Fe {
    type Output = Fe;
    fn mul(self, rhs: Fe) -> Fe {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let product = (self.value as u128 * rhs.value as u128) % self.modulus as u128;
        Fe {
            value: product as u64,
            modulus: self.modulus,
        }
    }
}

pub fn check_prime(p: u64) -> Result<(), MpcError> {
    let prime = p >= 2 && (2..).take_while(|d: &u64| d * d <= p).all(|d| p % d != 0);
    if prime {
        Ok(())
    } else {
        Err(MpcError::NotPrime(p))
    }
}

/// Source of uniformly random field elements.
pub trait Coins {
    fn draw(&mut self, modulus: u64) -> Fe;
}

pub struct SeededCoins(ChaCha8Rng);

impl SeededCoins {
    pub fn new(seed: u64) -> SeededCoins {
        SeededCoins(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl Coins for SeededCoins {
    fn draw(&mut self, modulus: u64) -> Fe {
        Fe::new(self.0.gen_range(0..modulus), modulus)
    }
}

/// Replays a fixed sequence of values; used to enumerate all randomness.
pub struct TapeCoins<'a> {
    tape: &'a [u64],
    pos: usize,
}

impl<'a> TapeCoins<'a> {
    pub fn new(tape: &'a [u64]) -> TapeCoins<'a> {
        TapeCoins { tape, pos: 0 }
    }
}

impl Coins for TapeCoins<'_> {
    fn draw(&mut self, modulus: u64) -> Fe {
        let v = self.tape[self.pos];
        self.pos += 1;
        Fe::new(v, modulus)
    }
}

/// Always draws zero and counts how many draws were made.
#[derive(Default)]
pub struct CountingCoins {
    pub drawn: usize,
}

impl Coins for CountingCoins {
    fn draw(&mut self, modulus: u64) -> Fe {
        self.drawn += 1;
        Fe::zero(modulus)
    }
}
