use serde::{Deserialize, Serialize};

use crate::report::csv;

/// Errors against a reference along a parameter sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub parameter: String,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log(e_i/e_{i+1}) / log(d_i/d_{i+1})` with `d` the distance of the
    /// parameter to its limit; reported, never asserted for the limit studies.
    pub observed_rates: Vec<f64>,
}

impl ConvergenceTable {
    pub fn new(parameter: &str, values: Vec<f64>, errors: Vec<f64>, limit: f64) -> Self {
        let observed_rates = values
            .windows(2)
            .zip(errors.windows(2))
            .map(|(p, e)| (e[0] / e[1]).ln() / ((p[0] - limit).abs() / (p[1] - limit).abs()).ln())
            .collect();
        Self { parameter: parameter.to_string(), values, errors, observed_rates }
    }

    pub fn to_csv(&self) -> String {
        csv(
            &format!("{},error", self.parameter),
            self.values.iter().zip(&self.errors).map(|(&v, &e)| vec![v, e]),
        )
    }
}
