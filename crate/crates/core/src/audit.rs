//! Process-wide counters for invariants that are checked on every
//! construction: the character-vector partition-of-unity identity and
//! the refinement law of every operator step.

use std::sync::atomic::{AtomicU64, Ordering};

static CHARACTER_VECTORS: AtomicU64 = AtomicU64::new(0);
static UNITY_VIOLATIONS: AtomicU64 = AtomicU64::new(0);
static REFINE_STEPS: AtomicU64 = AtomicU64::new(0);
static REFINEMENT_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AuditSnapshot {
    pub character_vectors: u64,
    pub unity_violations: u64,
    pub refine_steps: u64,
    pub refinement_violations: u64,
}

pub fn snapshot() -> AuditSnapshot {
    AuditSnapshot {
        character_vectors: CHARACTER_VECTORS.load(Ordering::Relaxed),
        unity_violations: UNITY_VIOLATIONS.load(Ordering::Relaxed),
        refine_steps: REFINE_STEPS.load(Ordering::Relaxed),
        refinement_violations: REFINEMENT_VIOLATIONS.load(Ordering::Relaxed),
    }
}

pub(crate) fn record_character_vector(ok: bool) {
    CHARACTER_VECTORS.fetch_add(1, Ordering::Relaxed);
    if !ok {
        UNITY_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
}

pub(crate) fn record_refine_step(ok: bool) {
    REFINE_STEPS.fetch_add(1, Ordering::Relaxed);
    if !ok {
        REFINEMENT_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
}
