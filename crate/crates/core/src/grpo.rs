//! Group-relative advantages and the dynamic-sampling filter.

use serde::{Deserialize, Serialize};

use crate::reward::RewardBreakdown;
use crate::scalar::Scalar;

/// Added to the group standard deviation before dividing.
pub const ADVANTAGE_EPSILON: f64 = 1e-8;
pub const DEFAULT_GROUP_SIZE: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RolloutGroup<T> {
    pub prompt_id: String,
    pub rewards: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakdowns: Option<Vec<RewardBreakdown<T>>>,
}

impl<T: Scalar> RolloutGroup<T> {
    pub fn new(prompt_id: &str, rewards: Vec<T>) -> RolloutGroup<T> {
        RolloutGroup {
            prompt_id: prompt_id.to_string(),
            rewards,
            breakdowns: None,
        }
    }

    /// All rewards identical, so every advantage is zero.
    pub fn is_zero_variance(&self) -> bool {
        self.rewards.windows(2).all(|w| w[0] == w[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AdvantageSet<T> {
    pub values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrpoError {
    #[error("group '{prompt_id}' has {size} rollouts; advantages need at least 2")]
    GroupTooSmall { prompt_id: String, size: usize },
    #[error("group '{0}' has a non-finite reward")]
    NonFinite(String),
}

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize(xs.len()).expect("length fits")
}

/// Population standard deviation.
pub fn std_pop<T: Scalar>(xs: &[T]) -> T {
    let m = mean(xs);
    let ss = xs.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m));
    (ss / T::from_usize(xs.len()).expect("length fits")).sqrt()
}

/// a_i = (r_i - mean) / (std_pop + 1e-8).
pub fn advantages<T: Scalar>(group: &RolloutGroup<T>) -> Result<AdvantageSet<T>, GrpoError> {
    let r = &group.rewards;
    if r.len() < 2 {
        return Err(GrpoError::GroupTooSmall {
            prompt_id: group.prompt_id.clone(),
            size: r.len(),
        });
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(GrpoError::NonFinite(group.prompt_id.clone()));
    }
    if group.is_zero_variance() {
        // the mean of equal floats can round away from them
        return Ok(AdvantageSet {
            values: vec![T::zero(); r.len()],
        });
    }
    let m = mean(r);
    let d = std_pop(r) + T::lit(ADVANTAGE_EPSILON);
    Ok(AdvantageSet {
        values: r.iter().map(|&x| (x - m) / d).collect(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: usize,
    pub zero_variance: usize,
}

/// Drops groups whose rewards carry no learning signal.
pub fn dynamic_filter<T: Scalar>(groups: Vec<RolloutGroup<T>>) -> (Vec<RolloutGroup<T>>, FilterReport) {
    let mut report = FilterReport::default();
    let kept: Vec<_> = groups
        .into_iter()
        .filter(|g| {
            let keep = !g.is_zero_variance();
            if keep {
                report.kept += 1;
            } else {
                report.zero_variance += 1;
            }
            keep
        })
        .collect();
    (kept, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adv(r: &[f64]) -> Vec<f64> {
        advantages(&RolloutGroup::new("p", r.to_vec())).unwrap().values
    }

    #[test]
    fn hand_examples() {
        for (got, want) in adv(&[1.0, 0.0, 1.0, 0.0]).iter().zip([1.0, -1.0, 1.0, -1.0]) {
            assert!((got - want).abs() < 1e-7);
        }
        for (got, want) in adv(&[3.0, 0.0]).iter().zip([1.0, -1.0]) {
            assert!((got - want).abs() < 1e-7);
        }
        assert_eq!(adv(&[0.1, 0.1, 0.1]), [0.0; 3]);
    }

    #[test]
    fn small_group_rejected() {
        let e = advantages(&RolloutGroup::new("q7", vec![1.0f64])).unwrap_err();
        assert_eq!(e, GrpoError::GroupTooSmall { prompt_id: "q7".into(), size: 1 });
        assert!(advantages(&RolloutGroup::<f64>::new("q", vec![])).is_err());
        assert!(advantages(&RolloutGroup::new("q", vec![1.0, f64::NAN])).is_err());
    }

    #[test]
    fn filter_counts() {
        let mut groups = Vec::new();
        for i in 0..10 {
            let r = if i % 3 == 0 && i < 9 { vec![1.0; 5] } else { vec![1.0, 0.0, 1.0, 0.0, 1.0] };
            groups.push(RolloutGroup::new(&format!("p{i}"), r));
        }
        let (kept, report) = dynamic_filter(groups);
        assert_eq!(report, FilterReport { kept: 7, zero_variance: 3 });
        assert_eq!(kept.len(), 7);
        let (again, r2) = dynamic_filter(kept.clone());
        assert_eq!(again, kept);
        assert_eq!(r2.zero_variance, 0);
    }

    #[test]
    fn f32_path() {
        let a = advantages(&RolloutGroup::new("p", vec![1.0f32, 0.0, 1.0, 0.0])).unwrap();
        assert!((a.values[0] - 1.0).abs() < 1e-6);
    }
}
