//! Reference computations written from scratch, sharing no code with the
//! library: plain complex arithmetic over explicit phase angles.
#![allow(dead_code)]

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl Cx {
    pub fn polar(r: f64, theta: f64) -> Cx {
        Cx { re: r * theta.cos(), im: r * theta.sin() }
    }
    pub fn add(self, o: Cx) -> Cx {
        Cx { re: self.re + o.re, im: self.im + o.im }
    }
    pub fn mul(self, o: Cx) -> Cx {
        Cx {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
    pub fn conj(self) -> Cx {
        Cx { re: self.re, im: -self.im }
    }
    pub fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// One party's choice: basis II flag and encoded number.
pub type Choice = (bool, u8);

/// Phase angles a party applies to `|0⟩, |1⟩, |2⟩`.
pub fn party_phases((basis_ii, n): Choice) -> [f64; 3] {
    let b = if basis_ii { 2.0 * PI / 3.0 } else { 0.0 };
    let e = 2.0 * PI * f64::from(n) / 3.0;
    [0.0, b + e, b - e]
}

fn apply(state: [Cx; 3], choice: Choice) -> [Cx; 3] {
    let ph = party_phases(choice);
    [0, 1, 2].map(|j| state[j].mul(Cx::polar(1.0, ph[j])))
}

fn initial() -> [Cx; 3] {
    [Cx::polar(1.0 / 3f64.sqrt(), 0.0); 3]
}

/// `|ψ_k⟩` with amplitudes `e^{2πijk/3}/√3`.
pub fn fourier(k: usize) -> [Cx; 3] {
    [0, 1, 2].map(|j| Cx::polar(1.0 / 3f64.sqrt(), 2.0 * PI * (j * k) as f64 / 3.0))
}

pub fn computational(k: usize) -> [Cx; 3] {
    [0, 1, 2].map(|j| Cx::polar(if j == k { 1.0 } else { 0.0 }, 0.0))
}

fn overlap(bra: [Cx; 3], ket: [Cx; 3]) -> f64 {
    (0..3)
        .fold(Cx { re: 0.0, im: 0.0 }, |acc, j| acc.add(bra[j].conj().mul(ket[j])))
        .abs2()
}

/// Probability that C finds `|ψ₀⟩` with nobody interfering.
pub fn detection(config: [Choice; 3]) -> f64 {
    let s = config.iter().fold(initial(), |s, &c| apply(s, c));
    overlap(fourier(0), s)
}

/// Probability of `|ψ₀⟩` when the qutrit is measured in `basis` (a
/// function from index to basis state) on `hop` (1 or 2) and the observed
/// state is resent.
pub fn detection_with_intercept(
    config: [Choice; 3],
    hop: usize,
    basis: fn(usize) -> [Cx; 3],
) -> f64 {
    let mut s = initial();
    for &c in &config[..hop] {
        s = apply(s, c);
    }
    (0..3)
        .map(|m| {
            let p = overlap(basis(m), s);
            let after = config[hop..].iter().fold(basis(m), |t, &c| apply(t, c));
            p * overlap(fourier(0), after)
        })
        .sum()
}

/// The rule claimed for honest runs: certain detection iff the bases agree
/// and the numbers sum to 0 mod 3, never with agreeing bases otherwise, and
/// 1/3 whenever the bases disagree.
pub fn claimed_rule(config: [Choice; 3]) -> f64 {
    let bases_match = config.iter().all(|c| c.0 == config[0].0);
    let sum: u32 = config.iter().map(|c| u32::from(c.1)).sum();
    match (bases_match, sum.is_multiple_of(3)) {
        (true, true) => 1.0,
        (true, false) => 0.0,
        (false, _) => 1.0 / 3.0,
    }
}

/// All 96 honest choices: A over {0,1,2}, B and C over {0,1}, any bases.
pub fn honest_configurations() -> Vec<[Choice; 3]> {
    let mut out = Vec::new();
    for ba in [false, true] {
        for bb in [false, true] {
            for bc in [false, true] {
                for a in 0..3 {
                    for b in 0..2 {
                        for c in 0..2 {
                            out.push([(ba, a), (bb, b), (bc, c)]);
                        }
                    }
                }
            }
        }
    }
    out
}
