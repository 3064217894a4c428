//! TOML experiment files for `qwalk config`.
//!
//! ```toml
//! steps = 200
//! realizations = 1000
//! seed = 0
//! measures = ["blp", "std_dev"]
//!
//! [initial]            # default psi(pi/4, pi/2)
//! delta = 0.7853981633974483
//! eta = 1.5707963267948966
//!
//! [initial2]           # default psi(-pi/4, pi/2)
//! delta = -0.7853981633974483
//! eta = 1.5707963267948966
//!
//! [disorder]
//! kind = "spatial"     # none | temporal | spatial
//! strength = 1.0
//! base_theta = 0.7853981633974483
//!
//! [output]
//! formats = ["csv", "svg"]   # csv | json | svg
//! ```
//!
//! Unknown keys are rejected.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use qwalk_core::{
    AngleDistribution, DisorderConfig, DisorderKind, ExperimentConfig, InitialStateSpec, MeasureKind,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::presets::Overrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            formats: default_formats(),
        }
    }
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    #[serde(default = "default_kind")]
    pub kind: DisorderKind,
    #[serde(default)]
    pub strength: f64,
    #[serde(default = "default_base_theta")]
    pub base_theta: f64,
    #[serde(default)]
    pub distribution: AngleDistribution,
}

fn default_kind() -> DisorderKind {
    DisorderKind::None
}

fn default_base_theta() -> f64 {
    FRAC_PI_4
}

impl Default for DisorderSection {
    fn default() -> Self {
        DisorderSection {
            kind: DisorderKind::None,
            strength: 0.0,
            base_theta: FRAC_PI_4,
            distribution: AngleDistribution::default(),
        }
    }
}

fn default_initial() -> InitialStateSpec {
    InitialStateSpec::new(FRAC_PI_4, FRAC_PI_2)
}

fn default_partner() -> InitialStateSpec {
    InitialStateSpec::new(-FRAC_PI_4, FRAC_PI_2)
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "default_initial")]
    pub initial: InitialStateSpec,
    #[serde(default = "default_partner")]
    pub initial2: InitialStateSpec,
    #[serde(default)]
    pub disorder: DisorderSection,
    pub steps: usize,
    #[serde(default = "one")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    pub measures: Vec<MeasureKind>,
    #[serde(default)]
    pub output: OutputSection,
}

impl ConfigFile {
    /// Parses and validates; every error names the offending key.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.experiment()?;
        Ok(cfg)
    }

    /// Command-line overrides win over file values.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        o.validate()?;
        self.steps = o.steps.unwrap_or(self.steps);
        self.realizations = o.realizations.unwrap_or(self.realizations);
        self.seed = o.seed.unwrap_or(self.seed);
        self.disorder.base_theta = o.theta.unwrap_or(self.disorder.base_theta);
        self.disorder.strength = o.strength.unwrap_or(self.disorder.strength);
        if o.svg && !self.output.formats.contains(&OutputFormat::Svg) {
            self.output.formats.push(OutputFormat::Svg);
        }
        Ok(())
    }

    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let exp = ExperimentConfig {
            initial: self.initial,
            partner: self.initial2,
            disorder: DisorderConfig {
                kind: self.disorder.kind,
                strength: self.disorder.strength,
                base_theta: self.disorder.base_theta,
                distribution: self.disorder.distribution,
                seed: 0,
            },
            steps: self.steps,
            realizations: self.realizations,
            master_seed: self.seed,
            measures: self.measures.iter().copied().collect(),
        };
        exp.validate()?;
        Ok(exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_key(text: &str) -> String {
        match ConfigFile::parse(text) {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_dotted_keys() {
        let cfg = ConfigFile::parse("steps = 10\ndisorder.kind = \"none\"\nmeasures = [\"std_dev\"]\n").unwrap();
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.steps, 10);
        assert_eq!(exp.realizations, 1);
        assert_eq!(exp.disorder.kind, DisorderKind::None);
        assert_eq!(cfg.output.formats, vec![OutputFormat::Csv]);
    }

    #[test]
    fn strength_out_of_range_names_key() {
        let msg = config_key("steps = 10\nmeasures = [\"blp\"]\n[disorder]\nkind = \"spatial\"\nstrength = 1.5\n");
        assert!(msg.contains("disorder.strength"), "{msg}");
    }

    #[test]
    fn unknown_key_is_located() {
        let msg = config_key("steps = 10\nmeasures = [\"blp\"]\n[disorder]\nkind = \"spatial\"\nstrenght = 0.5\n");
        assert!(msg.contains("strenght"), "{msg}");
        assert!(msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn unknown_measure_and_missing_steps() {
        assert!(config_key("steps = 3\nmeasures = [\"purity\"]\n").contains("purity"));
        assert!(config_key("measures = [\"blp\"]\n").contains("steps"));
        assert!(config_key("steps = 0\nmeasures = [\"blp\"]\n").contains("steps"));
        assert!(config_key("steps = 3\nmeasures = []\n").contains("measures"));
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = ConfigFile::parse("steps = 10\nseed = 3\nmeasures = [\"blp\"]\n[disorder]\nkind = \"temporal\"\nstrength = 0.2\n").unwrap();
        let o = Overrides {
            steps: Some(5),
            strength: Some(0.9),
            svg: true,
            ..Overrides::default()
        };
        cfg.apply(&o).unwrap();
        let exp = cfg.experiment().unwrap();
        assert_eq!((exp.steps, exp.master_seed, exp.disorder.strength), (5, 3, 0.9));
        assert!(cfg.output.formats.contains(&OutputFormat::Svg));
        let bad = Overrides {
            strength: Some(2.0),
            ..Overrides::default()
        };
        assert!(matches!(cfg.apply(&bad), Err(CliError::Usage(_))));
    }

    #[test]
    fn initial_state_keys() {
        let cfg = ConfigFile::parse(
            "steps = 4\nmeasures = [\"entropy\"]\ninitial.delta = 0.1\ninitial.eta = 0.2\ninitial2 = { delta = 0.3, eta = 0.4 }\n",
        )
        .unwrap();
        assert_eq!(cfg.initial, InitialStateSpec::new(0.1, 0.2));
        assert_eq!(cfg.initial2, InitialStateSpec::new(0.3, 0.4));
        assert!(config_key("steps = 4\nmeasures = [\"entropy\"]\ninitial.delta = 0.1\ninitial.eta = 0.2\ninitial.phase = 1\n")
            .contains("phase"));
    }
}
