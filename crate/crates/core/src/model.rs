//! Dataset representation: a shared discrete time axis and a set of named
//! data cases, each holding one optional value per timestep.

use std::collections::{BTreeSet, HashMap};

use crate::error::ModelError;

/// Category assigned to cases that do not carry one.
pub const IMPLICIT_CATEGORY: &str = "(none)";

/// Ordered, unique timestep labels. The engine only ever addresses time by
/// index; labels are for presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeAxis {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl TimeAxis {
    pub fn new<I, S>(labels: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(ModelError::EmptyAxis);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(ModelError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, t: usize) -> Option<&str> {
        self.labels.get(t).map(String::as_str)
    }

    pub fn time_index_of(&self, label: &str) -> Result<usize, ModelError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| ModelError::UnknownLabel(label.to_string()))
    }
}

/// One univariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCase {
    pub id: String,
    pub name: String,
    pub category: Option<String>,
    pub values: Vec<Option<f64>>,
}

impl DataCase {
    pub fn new(id: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        let id = id.into();
        Self {
            name: id.clone(),
            id,
            category: None,
            values,
        }
    }

    pub fn with_category(mut self, category: impl Into<String>) -> Self {
        self.category = Some(category.into());
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The grouping key, falling back to [`IMPLICIT_CATEGORY`].
    pub fn category_name(&self) -> &str {
        self.category.as_deref().unwrap_or(IMPLICIT_CATEGORY)
    }
}

/// Immutable collection of cases over one time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    id: String,
    axis: TimeAxis,
    cases: Vec<DataCase>,
    case_index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(
        id: impl Into<String>,
        axis: TimeAxis,
        cases: Vec<DataCase>,
    ) -> Result<Self, ModelError> {
        if cases.is_empty() {
            return Err(ModelError::NoCases);
        }
        let len = axis.len();
        let mut case_index = HashMap::with_capacity(cases.len());
        for (i, case) in cases.iter().enumerate() {
            if case.values.len() != len {
                return Err(ModelError::LengthMismatch {
                    case_id: case.id.clone(),
                    expected: len,
                    actual: case.values.len(),
                });
            }
            if let Some(t) = case
                .values
                .iter()
                .position(|v| v.is_some_and(|x| !x.is_finite()))
            {
                return Err(ModelError::NonFiniteValue {
                    case_id: case.id.clone(),
                    t,
                });
            }
            if case_index.insert(case.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateCaseId(case.id.clone()));
            }
        }
        Ok(Self {
            id: id.into(),
            axis,
            cases,
            case_index,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Returns a copy of this dataset registered under a different id.
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn axis(&self) -> &TimeAxis {
        &self.axis
    }

    pub fn len_t(&self) -> usize {
        self.axis.len()
    }

    pub fn cases(&self) -> &[DataCase] {
        &self.cases
    }

    pub fn case(&self, case_id: &str) -> Result<&DataCase, ModelError> {
        self.position(case_id).map(|i| &self.cases[i])
    }

    /// Row index of a case in ingestion order.
    pub fn position(&self, case_id: &str) -> Result<usize, ModelError> {
        self.case_index
            .get(case_id)
            .copied()
            .ok_or_else(|| ModelError::UnknownCase(case_id.to_string()))
    }

    pub fn value_at(&self, case_id: &str, t: usize) -> Result<Option<f64>, ModelError> {
        let case = self.case(case_id)?;
        case.values
            .get(t)
            .copied()
            .ok_or(ModelError::IndexOutOfRange {
                t,
                len: self.len_t(),
            })
    }

    /// Distinct effective category names, sorted.
    pub fn categories(&self) -> BTreeSet<&str> {
        self.cases.iter().map(DataCase::category_name).collect()
    }

    pub fn missing_cell_count(&self) -> usize {
        self.cases
            .iter()
            .map(|c| c.values.iter().filter(|v| v.is_none()).count())
            .sum()
    }

    /// Values of all cases at one timestep, in case order.
    pub fn column(&self, t: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        self.cases.iter().map(move |c| c.values[t])
    }
}
