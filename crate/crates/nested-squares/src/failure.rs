//! Leading-order failure rates of one stabilizer-measurement round, as exact
//! truncated power series in the per-gate error rate `p`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{NsqError, Result};

pub const DEFAULT_ORDER: usize = 4;

/// `sum_k c_k p^k` for `k <= order`; higher powers are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RationalPoly {
    pub fn zero(order: usize) -> Self {
        RationalPoly {
            coeffs: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn constant(order: usize, c: BigRational) -> Self {
        let mut r = Self::zero(order);
        r.coeffs[0] = c;
        r
    }

    pub fn one(order: usize) -> Self {
        Self::constant(order, BigRational::one())
    }

    /// The variable `p`.
    pub fn p(order: usize) -> Self {
        let mut r = Self::zero(order);
        if order >= 1 {
            r.coeffs[1] = BigRational::one();
        }
        r
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> Result<&BigRational> {
        self.coeffs.get(k).ok_or(NsqError::OrderTooLow {
            have: self.order(),
            need: k,
        })
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn same_order(&self, o: &Self) {
        assert_eq!(self.order(), o.order(), "series orders differ");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.same_order(o);
        RationalPoly {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.same_order(o);
        RationalPoly {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        RationalPoly {
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same_order(o);
        let n = self.order();
        let mut out = Self::zero(n);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(n + 1 - i).enumerate() {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one(self.order());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Series reciprocal; needs a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(NsqError::InvalidArgument("series with zero constant term has no inverse".into()));
        }
        let n = self.order();
        let mut inv = Self::zero(n);
        inv.coeffs[0] = c0.recip();
        for k in 1..=n {
            let mut s = BigRational::zero();
            for j in 1..=k {
                s += &self.coeffs[j] * &inv.coeffs[k - j];
            }
            inv.coeffs[k] = -s / c0;
        }
        Ok(inv)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inverse()?))
    }

    /// Value of the truncated polynomial at `p`.
    pub fn eval(&self, p: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * p + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})p")?,
                _ => write!(f, "({c})p^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(p^{})", self.order() + 1)
    }
}

/// `p^(n) = 1 - (1 - p)^n`, the error rate after `n` gates.
pub fn p_n(n: u32, order: usize) -> Result<RationalPoly> {
    if n < 1 {
        return Err(NsqError::InvalidArgument(format!("gate count {n} must be at least 1")));
    }
    let one = RationalPoly::one(order);
    Ok(one.sub(&one.sub(&RationalPoly::p(order)).pow(n)))
}

/// `x / (1 - x)`: odds of exactly this factor failing given none of the others did.
fn odds(x: &RationalPoly) -> Result<RationalPoly> {
    x.div(&RationalPoly::one(x.order()).sub(x))
}

/// How the four-particle term of the single-failure sum is written.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleTerm {
    /// `4 p2 / (1 - p2)`, exactly one of the four particles fails.
    #[default]
    Exact,
    /// `4 p2 / (1 - 4 p2)` as printed.
    Printed,
}

pub fn p_none_common(order: usize) -> Result<RationalPoly> {
    let one = RationalPoly::one(order);
    let f = |n| -> Result<RationalPoly> { Ok(one.sub(&p_n(n, order)?)) };
    Ok(f(2)?.pow(4).mul(&f(3)?.pow(2)).mul(&f(4)?.pow(2)).mul(&f(6)?))
}

/// Four, two, two and one particles see two, three, four and six gates.
pub fn p_single_common(order: usize, term: SingleTerm) -> Result<RationalPoly> {
    let p2 = p_n(2, order)?;
    let four = int(4);
    let first = match term {
        SingleTerm::Exact => odds(&p2)?.scale(&four),
        SingleTerm::Printed => p2
            .scale(&four)
            .div(&RationalPoly::one(order).sub(&p2.scale(&four)))?,
    };
    let s = first
        .add(&odds(&p_n(3, order)?)?.scale(&int(2)))
        .add(&odds(&p_n(4, order)?)?.scale(&int(2)))
        .add(&odds(&p_n(6, order)?)?);
    Ok(s.mul(&p_none_common(order)?))
}

pub fn e_common(order: usize, term: SingleTerm) -> Result<RationalPoly> {
    Ok(RationalPoly::one(order)
        .sub(&p_none_common(order)?)
        .sub(&p_single_common(order, term)?))
}

/// Spin of P2 (`p10`), spins of P0 and P4 (`p7`), three x and three y positions (`p2`).
pub fn p_none_present(order: usize) -> Result<RationalPoly> {
    let one = RationalPoly::one(order);
    let (pcb, pc, pxy) = (p_n(10, order)?, p_n(7, order)?, p_n(2, order)?);
    Ok(one
        .sub(&pcb)
        .mul(&one.sub(&pc).pow(2))
        .mul(&one.sub(&pxy).pow(3))
        .mul(&one.sub(&pxy).pow(3)))
}

pub fn p_single_present(order: usize) -> Result<RationalPoly> {
    let (pcb, pc, pxy) = (p_n(10, order)?, p_n(7, order)?, p_n(2, order)?);
    let s = odds(&pcb)?
        .add(&odds(&pc)?.scale(&int(2)))
        .add(&odds(&pxy)?.scale(&int(3)))
        .add(&odds(&pxy)?.scale(&int(3)));
    Ok(s.mul(&p_none_present(order)?))
}

pub fn e_present(order: usize) -> Result<RationalPoly> {
    Ok(RationalPoly::one(order)
        .sub(&p_none_present(order)?)
        .sub(&p_single_present(order)?))
}

pub fn quadratic_coefficient(f: &RationalPoly) -> Result<BigRational> {
    f.coefficient(2).cloned()
}

fn pn_at(n: i32, p: f64) -> f64 {
    // -expm1(n log1p(-p)) keeps precision for small p
    -(n as f64 * (-p).ln_1p()).exp_m1()
}

/// Closed form of `e_common` in double precision.
pub fn e_common_at(p: f64, term: SingleTerm) -> f64 {
    let (p2, p3, p4, p6) = (pn_at(2, p), pn_at(3, p), pn_at(4, p), pn_at(6, p));
    let none = (1.0 - p2).powi(4) * (1.0 - p3).powi(2) * (1.0 - p4).powi(2) * (1.0 - p6);
    let first = match term {
        SingleTerm::Exact => 4.0 * p2 / (1.0 - p2),
        SingleTerm::Printed => 4.0 * p2 / (1.0 - 4.0 * p2),
    };
    let single = (first + 2.0 * p3 / (1.0 - p3) + 2.0 * p4 / (1.0 - p4) + p6 / (1.0 - p6)) * none;
    1.0 - none - single
}

/// Closed form of `e_present` in double precision.
pub fn e_present_at(p: f64) -> f64 {
    let (pcb, pc, pxy) = (pn_at(10, p), pn_at(7, p), pn_at(2, p));
    let none = (1.0 - pcb) * (1.0 - pc).powi(2) * (1.0 - pxy).powi(6);
    let single = (pcb / (1.0 - pcb) + 2.0 * pc / (1.0 - pc) + 6.0 * pxy / (1.0 - pxy)) * none;
    1.0 - none - single
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureSummary {
    pub order: usize,
    pub common_quadratic: String,
    pub present_quadratic: String,
    /// Quadratic coefficient with the printed `1 - 4 p2` denominator.
    pub printed_common_quadratic: String,
    pub overhead_ratio: f64,
    pub e_common: String,
    pub e_present: String,
}

pub fn summary(order: usize) -> Result<FailureSummary> {
    if order < 2 {
        return Err(NsqError::OrderTooLow { have: order, need: 2 });
    }
    let ec = e_common(order, SingleTerm::Exact)?;
    let ep = e_present(order)?;
    let qc = quadratic_coefficient(&ec)?;
    let qp = quadratic_coefficient(&ep)?;
    let ql = quadratic_coefficient(&e_common(order, SingleTerm::Printed)?)?;
    Ok(FailureSummary {
        order,
        overhead_ratio: (&qp / &qc).to_f64().unwrap_or(f64::NAN),
        common_quadratic: qc.to_string(),
        present_quadratic: qp.to_string(),
        printed_common_quadratic: ql.to_string(),
        e_common: ec.to_string(),
        e_present: ep.to_string(),
    })
}

/// `p,e_common,e_present,ratio` rows from the closed forms.
pub fn sweep_csv(ps: &[f64]) -> String {
    let mut out = String::from("p,e_common,e_present,ratio\n");
    for &p in ps {
        let (a, b) = (e_common_at(p, SingleTerm::Exact), e_present_at(p));
        out.push_str(&format!("{p:e},{a:e},{b:e},{}\n", b / a));
    }
    out
}
