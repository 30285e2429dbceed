//! Named experiments, verification suites and their reports.
//!
//! Every suite item compares a measured value against a threshold fixed in
//! [`Thresholds`]; a suite passes iff every gated item passes. Reports carry
//! no timestamps, so equal configs produce byte-identical JSON.

mod checks;
mod config;
pub mod scenes;
mod svg;

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checks::{
    chart_vs_closed_form, composition_identity, euclidean_segment_invariance, radial_scaling,
    random_tangent, round_trip, sphere2_to_chart, sphere2_to_embedded, KernelSample,
};
pub use config::{ExperimentConfig, OutputFormat};
pub use scenes::{run_counterexample_sphere, CounterexampleOutcome};
pub use svg::orthographic_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    ReportOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteItem {
    pub name: String,
    /// The claim being checked, in one sentence.
    pub claim: String,
    pub status: Status,
    pub checked: usize,
    pub skipped: usize,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<serde_json::Value>,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl SuiteItem {
    pub fn new(name: impl Into<String>, claim: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            status: Status::ReportOnly,
            checked: 0,
            skipped: 0,
            value: None,
            threshold: None,
            detail: String::new(),
            report: None,
            wall_time_ms: 0.0,
        }
    }

    pub fn gate(mut self, pass: bool) -> Self {
        self.status = if pass { Status::Pass } else { Status::Fail };
        self
    }

    pub fn counts(mut self, checked: usize, skipped: usize) -> Self {
        self.checked = checked;
        self.skipped = skipped;
        self
    }

    pub fn measured(mut self, value: f64, threshold: f64) -> Self {
        self.value = Some(value);
        self.threshold = Some(threshold);
        self
    }

    pub fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn with_report<T: Serialize>(mut self, report: &T) -> Self {
        self.report = serde_json::to_value(report).ok();
        self
    }

    pub fn failed(name: &str, claim: &str, err: &crate::Error) -> Self {
        SuiteItem::new(name, claim)
            .gate(false)
            .detail(format!("error: {err}"))
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub passed: bool,
    pub seed: u64,
    pub items: Vec<SuiteItem>,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl SuiteResult {
    pub fn new(seed: u64) -> Self {
        Self {
            passed: true,
            seed,
            items: Vec::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn push(&mut self, item: SuiteItem) {
        self.passed &= item.passed();
        self.items.push(item);
    }

    pub fn extend(&mut self, other: SuiteResult) {
        for item in other.items {
            self.push(item);
        }
        self.wall_time_ms += other.wall_time_ms;
    }

    /// Runs `f`, splitting its wall time over the items it returns unless
    /// they timed themselves.
    pub fn timed(&mut self, f: impl FnOnce() -> Vec<SuiteItem>) {
        let start = Instant::now();
        let items = f();
        let per = start.elapsed().as_secs_f64() * 1e3 / items.len().max(1) as f64;
        for mut item in items {
            if item.wall_time_ms == 0.0 {
                item.wall_time_ms = per;
            }
            self.push(item);
        }
    }

    pub fn item(&self, name: &str) -> Option<&SuiteItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite results serialize") + "\n"
    }

    /// One line per item, for terminals.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for i in &self.items {
            let tag = match i.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::ReportOnly => "INFO",
            };
            let value = match (i.value, i.threshold) {
                (Some(v), Some(t)) => format!(" value={v:.3e} threshold={t:.3e}"),
                (Some(v), None) => format!(" value={v:.3e}"),
                _ => String::new(),
            };
            s.push_str(&format!(
                "{tag} {:<40} checked={} skipped={}{value} ({:.0} ms) {}\n",
                i.name, i.checked, i.skipped, i.wall_time_ms, i.detail
            ));
        }
        s.push_str(&format!(
            "{} ({} items, {:.1} s)\n",
            if self.passed { "ALL PASS" } else { "FAILURES" },
            self.items.len(),
            self.wall_time_ms / 1e3
        ));
        s
    }
}

/// Pass thresholds and sample budgets for every gated check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub round_trip_samples: usize,
    pub round_trip_closed_form: f64,
    pub round_trip_chart: f64,
    pub chart_samples: usize,
    pub chart_match: f64,
    pub composition_samples: usize,
    pub composition: f64,
    pub radial_scaling_relative: f64,
    pub collinearity: f64,
    /// Smallest deviation that counts as "not a geodesic" (radians).
    pub min_counterexample_deviation: f64,
    pub midpoint_gap_tolerance: f64,
    pub euclidean_control: f64,
    pub theorem_base_points: usize,
    pub fine_grid_size: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            round_trip_samples: 10_000,
            round_trip_closed_form: 1e-9,
            round_trip_chart: 1e-6,
            chart_samples: 1_000,
            chart_match: 1e-6,
            composition_samples: 1_000,
            composition: 1e-6,
            radial_scaling_relative: 1e-6,
            collinearity: 1e-9,
            min_counterexample_deviation: 0.1,
            midpoint_gap_tolerance: 0.01,
            euclidean_control: 1e-9,
            theorem_base_points: 5,
            fine_grid_size: 100,
        }
    }
}

/// `{k / n : k = 1..=n}`
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / n as f64).collect()
}

/// Independent random stream `stream` derived from the config seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Round trips and chart-vs-closed-form agreement.
pub fn run_kernel_suite(config: &ExperimentConfig) -> SuiteResult {
    let mut suite = SuiteResult::new(config.seed);
    suite.timed(|| checks::kernel_items(config));
    suite.wall_time_ms = suite.items.iter().map(|i| i.wall_time_ms).sum();
    suite
}

/// Composition, scaling, iterated contraction, intersections, the convex ⇒
/// totally p-convex direction and the ζ scenes.
pub fn run_proposition_suite(config: &ExperimentConfig) -> SuiteResult {
    let start = Instant::now();
    let mut suite = SuiteResult::new(config.seed);
    suite.timed(|| checks::algebra_items(config));
    suite.timed(|| scenes::iterated_items(config));
    suite.timed(|| scenes::intersection_items(config));
    suite.timed(|| scenes::theorem_forward_items(config));
    suite.timed(|| scenes::threshold_items(config));
    suite.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    suite
}

/// Every bundled scene by name.
pub fn run_scene(name: &str, config: &ExperimentConfig) -> crate::Result<SuiteResult> {
    let start = Instant::now();
    let mut suite = SuiteResult::new(config.seed);
    let items = match name {
        "example1" => run_counterexample_sphere(config).result.items,
        "example2" => scenes::example2_items(config),
        "hemisphere-two-points" => scenes::hemisphere_items(config),
        "finite-set" => scenes::finite_set_items(config),
        "ball-threshold" => scenes::euclidean_threshold_items(config),
        other => {
            return Err(crate::Error::Parse(format!(
                "unknown scene `{other}` (known: {})",
                SCENES.join(", ")
            )))
        }
    };
    for item in items {
        suite.push(item);
    }
    suite.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(suite)
}

pub const SCENES: [&str; 5] = [
    "example1",
    "example2",
    "hemisphere-two-points",
    "finite-set",
    "ball-threshold",
];

/// Everything: kernel checks, the scenes and the proposition suite.
pub fn run_verification(config: &ExperimentConfig) -> SuiteResult {
    let start = Instant::now();
    let mut suite = run_kernel_suite(config);
    for scene in [
        "example1",
        "example2",
        "hemisphere-two-points",
        "finite-set",
    ] {
        let mut part = SuiteResult::new(config.seed);
        part.timed(|| run_scene(scene, config).expect("bundled scene").items);
        suite.extend(part);
    }
    suite.extend(run_proposition_suite(config));
    suite.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    suite
}

/// Output paths for file-producing experiments.
pub fn output_path(config: &ExperimentConfig, default_name: &str) -> Option<PathBuf> {
    config.out.as_ref().map(|p| {
        if p.is_dir() {
            p.join(default_name)
        } else {
            p.clone()
        }
    })
}
