//! Tolerance hierarchy shared by every module.
//!
//! Two numbers govern all floating-point decisions: `eq` for equality tests
//! and `rank` for relative singular-value cuts. They can be overridden once
//! per process (the CLI's `--tol`); the ratio between them is fixed.

use std::sync::OnceLock;

pub const EPS_EQ: f64 = 1e-10;
pub const EPS_RANK: f64 = 1e-8;
const RATIO: f64 = EPS_RANK / EPS_EQ;

/// Default Hilbert-space cap for exact diagonalisation, in qubits.
pub const DEFAULT_CAP_QUBITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Tolerances {
    pub eq: f64,
    pub rank: f64,
}

static OVERRIDE: OnceLock<Tolerances> = OnceLock::new();
static CAP: OnceLock<u32> = OnceLock::new();

/// Install a process-wide equality tolerance. Fails if tolerances were
/// already fixed, either by an earlier call or by first use.
pub fn configure(eq: f64) -> Result<Tolerances, String> {
    if !(eq.is_finite() && eq > 0.0 && eq < 1e-2) {
        return Err(format!("tolerance {eq} outside (0, 1e-2)"));
    }
    let t = Tolerances { eq, rank: eq * RATIO };
    OVERRIDE.set(t).map_err(|_| "tolerances already fixed".to_string())?;
    Ok(t)
}

pub fn current() -> Tolerances {
    *OVERRIDE.get_or_init(|| Tolerances { eq: EPS_EQ, rank: EPS_RANK })
}

pub fn eq() -> f64 {
    current().eq
}

pub fn rank() -> f64 {
    current().rank
}

/// Exact-diagonalisation cap in qubits, read once from `TNKIT_CAP_QUBITS`.
pub fn cap_qubits() -> u32 {
    *CAP.get_or_init(|| {
        std::env::var("TNKIT_CAP_QUBITS")
            .ok()
            .and_then(|s| s.trim().parse::<u32>().ok())
            .filter(|&q| (1..=40).contains(&q))
            .unwrap_or(DEFAULT_CAP_QUBITS)
    })
}

/// Largest Hilbert-space dimension allowed for dense or Krylov solves.
pub fn cap_dim() -> usize {
    1usize << cap_qubits()
}
