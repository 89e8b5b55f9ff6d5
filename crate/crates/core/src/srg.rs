//! Feasibility of strongly regular graph parameters.
//!
//! Decisions are exact: the discriminant is tested with an integer square
//! root, floats are only produced for display.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrgParams {
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub mu: u64,
}

impl SrgParams {
    pub fn new(v: u64, k: u64, lambda: u64, mu: u64) -> Result<Self> {
        if k >= v || mu > k || (k > 0 && lambda >= k) {
            return Err(Error::Precondition(format!(
                "({v},{k},{lambda},{mu}) violates k < v, mu <= k, lambda < k"
            )));
        }
        if mu > 0 && k * (k - lambda - 1) != (v - k - 1) * mu {
            return Err(Error::Precondition(format!(
                "({v},{k},{lambda},{mu}) violates k(k-lambda-1) = (v-k-1)mu"
            )));
        }
        Ok(SrgParams { v, k, lambda, mu })
    }

    /// (q^2+2q+2, q+1, 0, 1).
    pub fn for_q(q: u64) -> Result<Self> {
        Self::new(q * q + 2 * q + 2, q + 1, 0, 1)
    }

    /// (4mu+1, 2mu, mu-1, mu).
    pub fn is_conference(&self) -> bool {
        self.mu >= 1
            && self.v == 4 * self.mu + 1
            && self.k == 2 * self.mu
            && self.lambda + 1 == self.mu
    }

    /// (lambda - mu)^2 + 4(k - mu).
    pub fn discriminant(&self) -> i64 {
        let d = self.lambda as i64 - self.mu as i64;
        d * d + 4 * (self.k as i64 - self.mu as i64)
    }
}

/// The two non-principal eigenvalues `((lambda-mu) ± sqrt(D)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalues {
    pub r: f64,
    pub s: f64,
    pub discriminant: i64,
    /// Both values are integers.
    pub integral: bool,
    /// Exact values when integral.
    pub exact: Option<(i64, i64)>,
    /// The variant written with (mu - lambda) gives `-s, -r` instead.
    pub mu_minus_lambda_form_negates: bool,
}

pub fn eigenvalues(p: &SrgParams) -> Eigenvalues {
    let d = p.discriminant();
    let b = p.lambda as i64 - p.mu as i64;
    let root = (d as f64).sqrt();
    let exact = exact_sqrt(d).and_then(|t| {
        if (b + t) % 2 == 0 {
            Some(((b + t) / 2, (b - t) / 2))
        } else {
            None
        }
    });
    Eigenvalues {
        r: (b as f64 + root) / 2.0,
        s: (b as f64 - root) / 2.0,
        discriminant: d,
        integral: exact.is_some(),
        exact,
        mu_minus_lambda_form_negates: b != 0,
    }
}

fn exact_sqrt(d: i64) -> Option<i64> {
    if d < 0 {
        return None;
    }
    let t = (d as u64).isqrt();
    (t * t == d as u64).then_some(t as i64)
}

/// Conference parameters are exempt; otherwise both eigenvalues must be
/// integers.
pub fn integrality_feasible(p: &SrgParams) -> bool {
    p.is_conference() || eigenvalues(p).integral
}

/// Whether 1 + 4q is an odd perfect square, i.e. q = u(u+1).
pub fn q_feasible(q: u64) -> bool {
    matches!(exact_sqrt(1 + 4 * q as i64), Some(t) if t % 2 == 1)
}

/// The `u` with q = u(u+1), if any.
pub fn q_root(q: u64) -> Option<u64> {
    exact_sqrt(1 + 4 * q as i64).map(|t| (t as u64 - 1) / 2)
}

/// Vertex count of a graph of girth 5, diameter 2 and degree q+1.
pub fn local_vertex_count(q: u64) -> u64 {
    1 + (q + 1) + (q + 1) * q
}

pub fn local_count_check(v_observed: u64, q: u64) -> bool {
    v_observed == local_vertex_count(q)
}

/// The full gate for one q, as reported by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrgGate {
    pub q: u64,
    pub params: SrgParams,
    pub conference: bool,
    pub eigenvalues: Eigenvalues,
    pub one_plus_4q: u64,
    pub feasible: bool,
    pub message: String,
}

pub fn gate(q: u64) -> Result<SrgGate> {
    if q < 2 {
        return Err(Error::Precondition("q must be at least 2".into()));
    }
    let params = SrgParams::for_q(q)?;
    let ev = eigenvalues(&params);
    let feasible = integrality_feasible(&params);
    let d = 1 + 4 * q;
    let message = if feasible {
        match q_root(q) {
            Some(u) => format!("feasible: 1+4q={d}={}^2, q=u(u+1) with u={u}", 2 * u + 1),
            None => "feasible: conference parameters".to_string(),
        }
    } else {
        format!("infeasible: 1+4q={d} not an odd square")
    };
    Ok(SrgGate {
        q,
        params,
        conference: params.is_conference(),
        eigenvalues: ev,
        one_plus_4q: d,
        feasible,
        message,
    })
}
