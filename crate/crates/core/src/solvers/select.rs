use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::steps::StepKind;
use crate::trace::Aggregation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchDecision {
    pub kind: StepKind,
    pub constraint_index: Option<usize>,
    pub aggregated_g: f64,
}

/// Switching test over precomputed constraint values.
///
/// # Panics
/// If `g_values` is empty.
pub fn select_constraint(g_values: &[f64], threshold: f64, mode: Aggregation) -> SwitchDecision {
    assert!(!g_values.is_empty(), "select_constraint needs at least one value");
    select_lazy(g_values.len(), threshold, mode, |i| Ok(g_values[i]))
        .expect("infallible")
        .0
}

/// Switching test that queries constraint values on demand and returns how
/// many queries were issued. `FirstViolated` stops at the first violation.
pub(crate) fn select_lazy(
    m: usize,
    threshold: f64,
    mode: Aggregation,
    mut value: impl FnMut(usize) -> Result<f64>,
) -> Result<(SwitchDecision, u64)> {
    let mut best_index = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..m {
        let v = value(i)?;
        if mode == Aggregation::FirstViolated && v > threshold {
            let decision = SwitchDecision {
                kind: StepKind::Nonproductive,
                constraint_index: Some(i),
                aggregated_g: v,
            };
            return Ok((decision, i as u64 + 1));
        }
        if v > best {
            best = v;
            best_index = i;
        }
    }
    let kind = if best > threshold {
        StepKind::Nonproductive
    } else {
        StepKind::Productive
    };
    let decision = SwitchDecision {
        kind,
        constraint_index: (kind == StepKind::Nonproductive).then_some(best_index),
        aggregated_g: best,
    };
    Ok((decision, m as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_feasible_is_productive() {
        let d = select_constraint(&[-1.0, -2.0], 0.0, Aggregation::MaxOfConstraints);
        assert_eq!(d.kind, StepKind::Productive);
        assert_eq!(d.constraint_index, None);
        assert_eq!(d.aggregated_g, -1.0);
    }

    #[test]
    fn first_violated_picks_smallest_index() {
        let d = select_constraint(&[-1.0, 0.2, 0.3], 0.1, Aggregation::FirstViolated);
        assert_eq!(d.kind, StepKind::Nonproductive);
        assert_eq!(d.constraint_index, Some(1));
        assert_eq!(d.aggregated_g, 0.2);
    }

    #[test]
    fn max_picks_argmax() {
        let d = select_constraint(&[-1.0, 0.2, 0.3], 0.1, Aggregation::MaxOfConstraints);
        assert_eq!(d.kind, StepKind::Nonproductive);
        assert_eq!(d.constraint_index, Some(2));
        assert_eq!(d.aggregated_g, 0.3);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let d = select_constraint(&[0.5, 0.5], 0.0, Aggregation::MaxOfConstraints);
        assert_eq!(d.constraint_index, Some(0));
    }

    #[test]
    fn first_violated_exits_early() {
        let (d, count) = select_lazy(5, 0.0, Aggregation::FirstViolated, |i| Ok(i as f64 - 1.5)).unwrap();
        assert_eq!(d.constraint_index, Some(2));
        assert_eq!(count, 3);
    }
}
