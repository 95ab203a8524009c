//! Serialized test reports.

use serde::{Deserialize, Serialize};

use super::influence::SeriesDecomposition;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    #[serde(rename = "I")]
    pub i: Option<f64>,
    #[serde(rename = "T_xy")]
    pub t_xy: Option<f64>,
    #[serde(rename = "T_yx")]
    pub t_yx: Option<f64>,
    #[serde(rename = "T_inst")]
    pub t_inst: Option<f64>,
}

impl Terms {
    pub fn from_decomposition(d: &SeriesDecomposition) -> Self {
        Terms {
            i: d.i,
            t_xy: d.t_xy,
            t_yx: d.t_yx,
            t_inst: d.t_inst,
        }
    }

    /// `I − (T_xy + T_yx + T_inst)` when every term is present.
    pub fn residual(&self) -> Option<f64> {
        Some(self.i? - (self.t_xy? + self.t_yx? + self.t_inst?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: String,
    pub value_log2: Option<f64>,
    pub terms: Terms,
    pub p_value: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub family: String,
    pub flags: Vec<String>,
}

impl TestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_names() {
        let r = TestReport {
            statistic: "sit_y_from_x".into(),
            value_log2: Some(0.5),
            terms: Terms::default(),
            p_value: None,
            trials: 0,
            seed: 0,
            family: "plugin:k=1".into(),
            flags: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            ["family", "flags", "p_value", "seed", "statistic", "terms", "trials", "value_log2"]
        );
        let terms: Vec<&String> = v["terms"].as_object().unwrap().keys().collect();
        assert_eq!(terms, ["I", "T_inst", "T_xy", "T_yx"]);
    }
}
