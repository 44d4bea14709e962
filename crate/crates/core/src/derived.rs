//! Per-timestep derived series: rank, net change, percentage change and
//! centered windowed variance, plus the aggregate and ego series used as
//! variable thresholds.

use serde::{Deserialize, Serialize};

use crate::error::DeriveError;
use crate::model::Dataset;

/// The series a query evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    Value,
    Rank,
    NetChange { delta: usize },
    PctChange { delta: usize },
    Variance { window: usize },
}

impl Criterion {
    pub fn validate(&self, len: usize) -> Result<(), DeriveError> {
        match *self {
            Criterion::NetChange { delta } | Criterion::PctChange { delta } => {
                check_delta(delta, len)
            }
            Criterion::Variance { window } => check_window(window, len),
            Criterion::Value | Criterion::Rank => Ok(()),
        }
    }
}

fn check_delta(delta: usize, len: usize) -> Result<(), DeriveError> {
    if delta >= 1 && delta < len {
        Ok(())
    } else {
        Err(DeriveError::DeltaOutOfRange { delta, len })
    }
}

fn check_window(window: usize, len: usize) -> Result<(), DeriveError> {
    if window % 2 == 1 && window <= len {
        Ok(())
    } else {
        Err(DeriveError::BadWindow { window, len })
    }
}

/// A per-case, per-timestep matrix of optional values, shaped like its
/// source dataset (rows follow case order).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedMatrix {
    pub criterion: Criterion,
    pub values: Vec<Vec<Option<f64>>>,
}

impl DerivedMatrix {
    pub fn row(&self, case: usize) -> &[Option<f64>] {
        &self.values[case]
    }
}

/// Competition ranks per timestep, rank 1 being the largest value. Tied
/// values share the smallest rank; missing values are unranked.
pub fn compute_rank_matrix(dataset: &Dataset) -> DerivedMatrix {
    let n = dataset.cases().len();
    let len = dataset.len_t();
    let mut values = vec![vec![None; len]; n];
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
    #[allow(clippy::needless_range_loop)] // fills the matrix column by column
    for t in 0..len {
        column.clear();
        column.extend(
            dataset
                .column(t)
                .enumerate()
                .filter_map(|(c, v)| v.map(|x| (x, c))),
        );
        column.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
        let mut rank = 1;
        for (i, &(x, c)) in column.iter().enumerate() {
            // -0.0 and 0.0 compare equal; total_cmp alone would split them.
            if i > 0 && x != column[i - 1].0 {
                rank = i + 1;
            }
            values[c][t] = Some(rank as f64);
        }
    }
    DerivedMatrix {
        criterion: Criterion::Rank,
        values,
    }
}

fn lagged(
    dataset: &Dataset,
    delta: usize,
    f: impl Fn(f64, f64) -> Option<f64>,
) -> Vec<Vec<Option<f64>>> {
    dataset
        .cases()
        .iter()
        .map(|case| {
            (0..case.values.len())
                .map(|t| {
                    let then = case.values[t.checked_sub(delta)?]?;
                    f(case.values[t]?, then)
                })
                .collect()
        })
        .collect()
}

/// `v[t] - v[t - delta]`.
pub fn compute_net_change(dataset: &Dataset, delta: usize) -> Result<DerivedMatrix, DeriveError> {
    check_delta(delta, dataset.len_t())?;
    Ok(DerivedMatrix {
        criterion: Criterion::NetChange { delta },
        values: lagged(dataset, delta, |now, then| Some(now - then)),
    })
}

/// `100 * (v[t] - v[t - delta]) / |v[t - delta]|`, undefined for a zero base.
pub fn compute_pct_change(dataset: &Dataset, delta: usize) -> Result<DerivedMatrix, DeriveError> {
    check_delta(delta, dataset.len_t())?;
    Ok(DerivedMatrix {
        criterion: Criterion::PctChange { delta },
        values: lagged(dataset, delta, |now, then| {
            (then != 0.0).then(|| 100.0 * (now - then) / then.abs())
        }),
    })
}

/// Population variance over the present values of a centered window of
/// `window` timesteps. Windows are truncated at the series edges.
pub fn compute_windowed_variance(
    dataset: &Dataset,
    window: usize,
) -> Result<DerivedMatrix, DeriveError> {
    let len = dataset.len_t();
    check_window(window, len)?;
    let half = window / 2;
    let values = dataset
        .cases()
        .iter()
        .map(|case| {
            (0..len)
                .map(|t| {
                    let lo = t.saturating_sub(half);
                    let hi = (t + half).min(len - 1);
                    window_variance(&case.values[lo..=hi])
                })
                .collect()
        })
        .collect();
    Ok(DerivedMatrix {
        criterion: Criterion::Variance { window },
        values,
    })
}

/// Two-pass variance, shifted by the first present value so that a
/// constant window yields exactly zero.
fn window_variance(cells: &[Option<f64>]) -> Option<f64> {
    let mut present = cells.iter().flatten().copied();
    let pivot = present.next()?;
    let (mut count, mut sum) = (1usize, 0.0);
    for x in present {
        count += 1;
        sum += x - pivot;
    }
    let mean = sum / count as f64;
    let ss: f64 = cells
        .iter()
        .flatten()
        .map(|x| {
            let d = (x - pivot) - mean;
            d * d
        })
        .sum();
    Some(ss / count as f64)
}

/// Mean of present values across cases at each timestep.
pub fn compute_aggregate_series(dataset: &Dataset) -> Vec<Option<f64>> {
    (0..dataset.len_t())
        .map(|t| {
            let (sum, count) = dataset
                .column(t)
                .flatten()
                .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
            (count > 0).then(|| sum / count as f64)
        })
        .collect()
}

pub fn ego_series(dataset: &Dataset, ego_id: &str) -> Result<Vec<Option<f64>>, DeriveError> {
    dataset
        .case(ego_id)
        .map(|c| c.values.clone())
        .map_err(|_| DeriveError::UnknownEgo(ego_id.to_string()))
}

pub fn derive(dataset: &Dataset, criterion: Criterion) -> Result<DerivedMatrix, DeriveError> {
    match criterion {
        Criterion::Value => Ok(DerivedMatrix {
            criterion,
            values: dataset.cases().iter().map(|c| c.values.clone()).collect(),
        }),
        Criterion::Rank => Ok(compute_rank_matrix(dataset)),
        Criterion::NetChange { delta } => compute_net_change(dataset, delta),
        Criterion::PctChange { delta } => compute_pct_change(dataset, delta),
        Criterion::Variance { window } => compute_windowed_variance(dataset, window),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DataCase, TimeAxis};
    use proptest::prelude::*;

    fn one_series(values: &[Option<f64>]) -> Dataset {
        let axis = TimeAxis::new((0..values.len()).map(|i| i.to_string())).unwrap();
        Dataset::new("d", axis, vec![DataCase::new("A", values.to_vec())]).unwrap()
    }

    fn one_step(values: &[Option<f64>]) -> Dataset {
        let axis = TimeAxis::new(["0"]).unwrap();
        let cases = values
            .iter()
            .enumerate()
            .map(|(i, v)| DataCase::new(((b'A' + i as u8) as char).to_string(), vec![*v]))
            .collect();
        Dataset::new("d", axis, cases).unwrap()
    }

    fn ranks_at0(values: &[Option<f64>]) -> Vec<Option<f64>> {
        compute_rank_matrix(&one_step(values))
            .values
            .iter()
            .map(|r| r[0])
            .collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(
            ranks_at0(&[Some(3.0), Some(1.0), Some(2.0)]),
            vec![Some(1.0), Some(3.0), Some(2.0)]
        );
        assert_eq!(
            ranks_at0(&[Some(5.0), Some(5.0), Some(2.0)]),
            vec![Some(1.0), Some(1.0), Some(3.0)]
        );
        assert_eq!(
            ranks_at0(&[Some(4.0), None, Some(7.0)]),
            vec![Some(2.0), None, Some(1.0)]
        );
        assert_eq!(
            ranks_at0(&[Some(0.0), Some(-0.0), Some(-1.0)]),
            vec![Some(1.0), Some(1.0), Some(3.0)]
        );
    }

    #[test]
    fn net_change_examples() {
        let d = one_series(&[Some(10.0), Some(12.0), Some(9.0)]);
        assert_eq!(
            compute_net_change(&d, 1).unwrap().values[0],
            vec![None, Some(2.0), Some(-3.0)]
        );
        let d = one_series(&[Some(7.0); 4]);
        assert_eq!(
            compute_net_change(&d, 2).unwrap().values[0],
            vec![None, None, Some(0.0), Some(0.0)]
        );
        let d = one_series(&[Some(10.0), None, Some(9.0)]);
        assert_eq!(compute_net_change(&d, 1).unwrap().values[0], vec![None; 3]);
        assert_eq!(
            compute_net_change(&d, 3),
            Err(DeriveError::DeltaOutOfRange { delta: 3, len: 3 })
        );
        assert!(compute_net_change(&d, 0).is_err());
    }

    #[test]
    fn pct_change_examples() {
        let d = one_series(&[Some(100.0), Some(110.0)]);
        let out = compute_pct_change(&d, 1).unwrap().values[0].clone();
        assert_eq!(out[0], None);
        assert!((out[1].unwrap() - 10.0).abs() < 1e-12);
        let d = one_series(&[Some(0.0), Some(5.0)]);
        assert_eq!(
            compute_pct_change(&d, 1).unwrap().values[0],
            vec![None, None]
        );
        let d = one_series(&[Some(-4.0), Some(-2.0)]);
        assert_eq!(
            compute_pct_change(&d, 1).unwrap().values[0],
            vec![None, Some(50.0)]
        );
    }

    #[test]
    fn variance_examples() {
        let d = one_series(&[Some(2.0); 3]);
        assert_eq!(
            compute_windowed_variance(&d, 3).unwrap().values[0],
            vec![Some(0.0); 3]
        );
        let d = one_series(&[Some(1.0), Some(2.0), Some(3.0)]);
        let v = compute_windowed_variance(&d, 3).unwrap().values[0].clone();
        assert!((v[1].unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((v[0].unwrap() - 0.25).abs() < 1e-12);
        assert!((v[2].unwrap() - 0.25).abs() < 1e-12);
        assert!(compute_windowed_variance(&d, 2).is_err());
        assert!(compute_windowed_variance(&d, 5).is_err());
        assert!(compute_windowed_variance(&d, 0).is_err());
        let d = one_series(&[None, None, Some(3.0), None, None]);
        assert_eq!(
            compute_windowed_variance(&d, 3).unwrap().values[0],
            vec![None, Some(0.0), Some(0.0), Some(0.0), None]
        );
    }

    #[test]
    fn aggregate_and_ego() {
        assert_eq!(
            compute_aggregate_series(&one_step(&[Some(3.0), Some(1.0), Some(2.0)])),
            vec![Some(2.0)]
        );
        assert_eq!(
            compute_aggregate_series(&one_step(&[Some(5.0), None])),
            vec![Some(5.0)]
        );
        assert_eq!(
            compute_aggregate_series(&one_step(&[None, None])),
            vec![None]
        );
        let d = one_series(&[Some(70.0), None]);
        assert_eq!(ego_series(&d, "A").unwrap(), vec![Some(70.0), None]);
        assert_eq!(
            ego_series(&d, "XXX"),
            Err(DeriveError::UnknownEgo("XXX".into()))
        );
    }

    #[test]
    fn derive_dispatches() {
        let d = one_series(&[Some(1.0), Some(2.0), Some(4.0)]);
        assert_eq!(
            derive(&d, Criterion::Value).unwrap().values[0],
            d.cases()[0].values
        );
        assert_eq!(
            derive(&d, Criterion::Rank).unwrap(),
            compute_rank_matrix(&d)
        );
        assert_eq!(
            derive(&d, Criterion::Variance { window: 3 }).unwrap(),
            compute_windowed_variance(&d, 3).unwrap()
        );
        assert_eq!(
            derive(&d, Criterion::PctChange { delta: 1 }).unwrap(),
            compute_pct_change(&d, 1).unwrap()
        );
    }

    fn arb_rows() -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
        (1usize..6, 2usize..12).prop_flat_map(|(n, t)| {
            let cell = prop_oneof![1 => Just(None), 5 => (-1e3f64..1e3).prop_map(Some)];
            proptest::collection::vec(proptest::collection::vec(cell, t), n)
        })
    }

    fn from_rows(rows: Vec<Vec<Option<f64>>>) -> Dataset {
        let t = rows[0].len();
        let axis = TimeAxis::new((0..t).map(|i| i.to_string())).unwrap();
        let cases = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| DataCase::new(format!("c{i}"), r))
            .collect();
        Dataset::new("d", axis, cases).unwrap()
    }

    proptest! {
        #[test]
        fn variance_nonnegative_and_scales(rows in arb_rows(), w in 0usize..3, a in -50f64..50.0) {
            let d = from_rows(rows.clone());
            let window = 2 * w + 1;
            prop_assume!(window <= d.len_t());
            let base = compute_windowed_variance(&d, window).unwrap();
            let scaled = from_rows(rows.iter().map(|r| r.iter().map(|v| v.map(|x| a * x)).collect()).collect());
            let sv = compute_windowed_variance(&scaled, window).unwrap();
            for (r0, r1) in base.values.iter().zip(&sv.values) {
                for (x, y) in r0.iter().zip(r1) {
                    prop_assert_eq!(x.is_some(), y.is_some());
                    if let (Some(x), Some(y)) = (x, y) {
                        prop_assert!(*x >= 0.0);
                        let expected = a * a * x;
                        prop_assert!((y - expected).abs() <= 1e-9 * expected.abs().max(1e-300) + 1e-12);
                    }
                }
            }
        }

        #[test]
        fn net_and_pct_change_agree_in_sign(rows in arb_rows(), delta in 1usize..3) {
            let d = from_rows(rows);
            prop_assume!(delta < d.len_t());
            let net = compute_net_change(&d, delta).unwrap();
            let pct = compute_pct_change(&d, delta).unwrap();
            for (rn, rp) in net.values.iter().zip(&pct.values) {
                for (n, p) in rn.iter().zip(rp) {
                    if let (Some(n), Some(p)) = (n, p) {
                        prop_assert_eq!(n.partial_cmp(&0.0), p.partial_cmp(&0.0));
                    }
                }
            }
        }

        #[test]
        fn single_case_aggregate_is_identity(rows in arb_rows()) {
            let d = from_rows(rows[..1].to_vec());
            prop_assert_eq!(compute_aggregate_series(&d), d.cases()[0].values.clone());
        }

        #[test]
        fn ego_matches_value_row(rows in arb_rows()) {
            let d = from_rows(rows);
            let value = derive(&d, Criterion::Value).unwrap();
            for (i, c) in d.cases().iter().enumerate() {
                prop_assert_eq!(&ego_series(&d, &c.id).unwrap(), value.row(i));
            }
        }

        #[test]
        fn distinct_values_rank_as_permutation(mut xs in proptest::collection::vec(-1e6f64..1e6, 1..30)) {
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let d = one_step(&xs.iter().copied().map(Some).collect::<Vec<_>>());
            let mut ranks: Vec<usize> = compute_rank_matrix(&d).values.iter().map(|r| r[0].unwrap() as usize).collect();
            ranks.sort_unstable();
            prop_assert_eq!(ranks, (1..=xs.len()).collect::<Vec<_>>());
        }
    }
}
