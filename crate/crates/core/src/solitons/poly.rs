//! Complex polynomials in ascending-coefficient form.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative coefficient tolerance used by [`Poly::gcd`] to decide that a remainder vanishes.
pub const GCD_TOLERANCE: f64 = 1e-9;

/// `Σ c_k z^k`. The zero polynomial has no coefficients; otherwise the last one is nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c·z^k`.
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut v = vec![ZERO; k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// Monic polynomial with the given roots, scaled by `lead`.
    pub fn from_roots(roots: &[Complex64], lead: Complex64) -> Self {
        let mut p = Self::constant(lead);
        for &r in roots {
            p = &p * &Self::new(vec![-r, Complex64::new(1.0, 0.0)]);
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops trailing coefficients below `tol` in absolute value.
    fn trimmed(mut self, tol: f64) -> Self {
        while self.coeffs.last().is_some_and(|c| c.norm() <= tol) {
            self.coeffs.pop();
        }
        self
    }

    /// Euclidean division; `None` when dividing by zero.
    pub fn div_rem(&self, divisor: &Poly) -> Option<(Poly, Poly)> {
        let db = divisor.degree()?;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= db {
            return Some((Poly::zero(), self.clone()));
        }
        let mut quot = vec![ZERO; rem.len() - db];
        for k in (0..quot.len()).rev() {
            let c = rem[k + db] / lead;
            quot[k] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= c * d;
            }
            rem[k + db] = ZERO;
        }
        rem.truncate(db);
        Some((Poly::new(quot), Poly::new(rem)))
    }

    /// Monic greatest common divisor, treating remainder coefficients below
    /// `rel_tol` times the largest input coefficient as zero.
    pub fn gcd(&self, other: &Poly, rel_tol: f64) -> Poly {
        let tol = rel_tol * self.max_coeff().max(other.max_coeff());
        let (mut a, mut b) = (self.clone().trimmed(tol), other.clone().trimmed(tol));
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r.trimmed(tol);
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        a.scale(lead.inv())
    }

    /// All complex roots (with multiplicity) by Durand–Kerner iteration followed by Newton polishing.
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(deg) = self.degree() else { return Vec::new() };
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let monic: Vec<Complex64> = self.coeffs.iter().map(|c| c / lead).collect();
        let eval_monic = |z: Complex64| monic.iter().rev().fold(ZERO, |acc, &c| acc * z + c);
        let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let seed = Complex64::from_polar(0.4 * radius, 0.9);
        let mut z: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32 + 1)).collect();
        if z.iter().any(|v| v.norm() < 1e-3) {
            z = (0..deg).map(|k| Complex64::from_polar(0.5 * radius, 0.4 + k as f64 * 2.3)).collect();
        }
        for _ in 0..2000 {
            let mut change: f64 = 0.0;
            for i in 0..deg {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..deg {
                    if i != j {
                        denom *= z[i] - z[j];
                    }
                }
                if denom == ZERO {
                    denom = Complex64::new(1e-12, 0.0);
                }
                let step = eval_monic(z[i]) / denom;
                z[i] -= step;
                change = change.max(step.norm());
            }
            if change < 1e-15 * radius {
                break;
            }
        }
        let dp = self.derivative();
        for r in &mut z {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = self.eval(*r) / d;
                if !step.is_finite() || step.norm() > 1e-6 * (1.0 + r.norm()) {
                    break;
                }
                *r -= step;
            }
        }
        z
    }

    /// Parses comma-separated ascending coefficients, each `a`, `bi` or `a±bi`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let coeffs = text.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad complex coefficient {s:?}"));
    let num = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not a leading sign or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, num(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 || c.im.is_sign_negative() {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|&c| fmt_complex(c)).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for Poly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(ZERO) + rhs.coeffs.get(k).copied().unwrap_or(ZERO)
                })
                .collect(),
        )
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_documented_forms() {
        assert_eq!(Poly::parse("0,1").unwrap(), Poly::monomial(1, c(1.0, 0.0)));
        let p = Poly::parse("1,0,0,2i").unwrap();
        assert_eq!(p.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]);
        let p = Poly::parse(" 1.5-2i , -i, 3e-2+1e+1i ,i").unwrap();
        assert_eq!(p.coeffs(), &[c(1.5, -2.0), c(0.0, -1.0), c(0.03, 10.0), c(0.0, 1.0)]);
        assert_eq!(Poly::parse("0,0").unwrap(), Poly::zero());
        assert!(Poly::parse("1,x").is_err());
        assert!(Poly::parse("").is_err());
    }

    #[test]
    fn display_round_trips() {
        let p = Poly::new(vec![c(1.0, -2.5), c(0.0, 3.0), c(-4.0, 0.0), c(0.5, 0.25)]);
        assert_eq!(Poly::parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn arithmetic_and_derivative() {
        let p = Poly::from_real(&[1.0, 2.0, 3.0]);
        let q = Poly::from_real(&[0.0, 1.0]);
        assert_eq!(&p * &q, Poly::from_real(&[0.0, 1.0, 2.0, 3.0]));
        assert_eq!(p.derivative(), Poly::from_real(&[2.0, 6.0]));
        assert_eq!(&p - &p, Poly::zero());
        assert_eq!(p.eval(c(2.0, 0.0)), c(17.0, 0.0));
    }

    #[test]
    fn gcd_detects_common_factors() {
        let common = Poly::from_roots(&[c(0.3, -1.1)], c(1.0, 0.0));
        let a = &common * &Poly::from_roots(&[c(2.0, 0.5), c(-1.0, 0.0)], c(0.7, 0.2));
        let b = &common * &Poly::from_roots(&[c(0.0, 1.0)], c(-1.3, 0.0));
        let g = a.gcd(&b, GCD_TOLERANCE);
        assert_eq!(g.degree(), Some(1));
        assert!((g.coeffs()[0] + c(0.3, -1.1)).norm() < 1e-10);
        let coprime = Poly::from_real(&[1.0, 1.0]).gcd(&Poly::from_real(&[0.0, 1.0]), GCD_TOLERANCE);
        assert_eq!(coprime.degree(), Some(0));
    }

    #[test]
    fn roots_with_multiplicity() {
        let want = [c(0.0, 0.0), c(0.0, 0.0), c(1.5, -0.5)];
        let p = Poly::from_roots(&want, c(2.0, 1.0));
        let mut got = p.roots();
        got.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        assert!(got[0].norm() < 1e-6 && got[1].norm() < 1e-6);
        assert!((got[2] - want[2]).norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn division_identity(a in prop::collection::vec(-5.0f64..5.0, 1..7),
                             b in prop::collection::vec(-5.0f64..5.0, 1..4)) {
            let a = Poly::new(a.iter().zip(a.iter().rev()).map(|(&x, &y)| c(x, y)).collect());
            let b = Poly::new(b.iter().map(|&x| c(x, 0.5)).collect());
            let (q, r) = a.div_rem(&b).unwrap();
            let back = &(&q * &b) + &r;
            let n = a.coeffs().len().max(back.coeffs().len());
            for k in 0..n {
                let x = a.coeffs().get(k).copied().unwrap_or(ZERO);
                let y = back.coeffs().get(k).copied().unwrap_or(ZERO);
                prop_assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()));
            }
            prop_assert!(r.degree() < b.degree() || r.is_zero());
        }
    }
}
