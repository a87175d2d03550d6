use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Exploratory,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObsValue {
    Exact {
        #[serde(serialize_with = "rational::as_str::serialize")]
        value: Rational,
        approx: f64,
    },
    Float {
        value: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation {
    pub name: String,
    pub param: String,
    pub value: ObsValue,
    /// What the number is: `exact`, `lower_bound`, `upper_bound`, `float`.
    pub tag: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Non-gating checks are reported but do not decide the verdict.
    pub gating: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub verdict: Verdict,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub notes: Vec<String>,
}

impl ScenarioReport {
    pub fn new(scenario: &str) -> Self {
        ScenarioReport {
            scenario: scenario.to_string(),
            verdict: Verdict::Pass,
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            observations: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("parameter serializes"));
    }

    pub fn exact(&mut self, name: &str, param: impl ToString, value: &Rational, tag: &str) {
        self.observations.push(Observation {
            name: name.to_string(),
            param: param.to_string(),
            value: ObsValue::Exact {
                value: value.clone(),
                approx: rational::to_f64(value),
            },
            tag: tag.to_string(),
        });
    }

    pub fn float(&mut self, name: &str, param: impl ToString, value: f64, tag: &str) {
        self.observations.push(Observation {
            name: name.to_string(),
            param: param.to_string(),
            value: ObsValue::Float { value },
            tag: tag.to_string(),
        });
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            gating: true,
            detail: detail.into(),
        });
        pass
    }

    pub fn soft_check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            gating: false,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn observation(&self, name: &str, param: &str) -> Option<&Observation> {
        self.observations
            .iter()
            .find(|o| o.name == name && o.param == param)
    }

    /// Sets the verdict from the gating checks.
    pub fn finish(mut self, exploratory: bool) -> Self {
        self.verdict = if exploratory {
            Verdict::Exploratory
        } else if self.checks.iter().all(|c| !c.gating || c.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Long format: `scenario,name,param,value_num,value_den,value_f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,name,param,value_num,value_den,value_f64\n");
        for o in &self.observations {
            let (num, den, f) = match &o.value {
                ObsValue::Exact { value, approx } => {
                    (value.numer().to_string(), value.denom().to_string(), *approx)
                }
                ObsValue::Float { value } => (String::new(), String::new(), *value),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&self.scenario),
                csv_field(&o.name),
                csv_field(&o.param),
                num,
                den,
                f
            ));
        }
        out
    }

    /// Writes `report.json` and `observations.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join("report.json"), self.to_json().as_bytes())?;
        write_atomic(&dir.join("observations.csv"), self.to_csv().as_bytes())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
