// SPDX-License-Identifier: Apache-2.0

//! Device spec text file.
//!
//! One `key = value` pair per line; `#` starts a comment, blank lines are
//! ignored, each key may appear once.
//!
//! ```text
//! device_seed = 7              # required, decimal or 0x-prefixed hex
//! cell_count = 65536           # default 65536
//! stable_fraction = 0.95       # default 0.95
//! fuzzy_bias_low = 0.05        # default 0.05
//! fuzzy_bias_high = 0.95       # default 0.95
//! bias[12] = 0.5               # optional per-cell override, any number of lines
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use ternpuf_core::device::DEFAULT_CELL_COUNT;
use ternpuf_core::{BiasModel, SramPufDevice};

use crate::codec::{read_file, write_atomic};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceSpec {
    pub cell_count: usize,
    pub model: BiasModel,
    pub device_seed: u64,
    /// Explicit biases applied after the draw, keyed by cell index.
    pub overrides: BTreeMap<usize, f64>,
}

impl DeviceSpec {
    pub fn new(device_seed: u64) -> Self {
        Self {
            cell_count: DEFAULT_CELL_COUNT,
            model: BiasModel::default(),
            device_seed,
            overrides: BTreeMap::new(),
        }
    }

    pub fn build(&self) -> Result<SramPufDevice> {
        let mut dev = SramPufDevice::build(self.cell_count, &self.model, self.device_seed)?;
        for (&i, &b) in &self.overrides {
            dev = dev.with_bias(i, b)?;
        }
        Ok(dev)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        let mut overrides = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let err = |reason: String| Error::DeviceSpec {
                line: line_no,
                reason,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(index) = key.strip_prefix("bias[").and_then(|k| k.strip_suffix(']')) {
                let index: usize = index
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad cell index `{index}`")))?;
                let bias = parse_f64(value).map_err(err)?;
                if overrides.insert(index, bias).is_some() {
                    return Err(err(format!("duplicate bias[{index}]")));
                }
                continue;
            }
            if !matches!(
                key,
                "device_seed"
                    | "cell_count"
                    | "stable_fraction"
                    | "fuzzy_bias_low"
                    | "fuzzy_bias_high"
            ) {
                return Err(err(format!("unknown key `{key}`")));
            }
            if seen
                .insert(key.to_string(), (line_no, value.to_string()))
                .is_some()
            {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }

        let field = |key: &str| seen.get(key).map(|(l, v)| (*l, v.as_str()));
        let with_line = |line: usize| move |reason: String| Error::DeviceSpec { line, reason };

        let device_seed = match field("device_seed") {
            Some((l, v)) => parse_u64(v).map_err(with_line(l))?,
            None => {
                return Err(Error::DeviceSpec {
                    line: 0,
                    reason: "missing required key `device_seed`".into(),
                })
            }
        };
        let mut spec = DeviceSpec::new(device_seed);
        if let Some((l, v)) = field("cell_count") {
            spec.cell_count = parse_u64(v).map_err(with_line(l))? as usize;
        }
        for (key, slot) in [
            ("stable_fraction", &mut spec.model.stable_fraction),
            ("fuzzy_bias_low", &mut spec.model.fuzzy_bias_low),
            ("fuzzy_bias_high", &mut spec.model.fuzzy_bias_high),
        ] {
            if let Some((l, v)) = field(key) {
                *slot = parse_f64(v).map_err(with_line(l))?;
            }
        }
        spec.overrides = overrides;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "device_seed = {}", self.device_seed);
        let _ = writeln!(s, "cell_count = {}", self.cell_count);
        let _ = writeln!(s, "stable_fraction = {}", self.model.stable_fraction);
        let _ = writeln!(s, "fuzzy_bias_low = {}", self.model.fuzzy_bias_low);
        let _ = writeln!(s, "fuzzy_bias_high = {}", self.model.fuzzy_bias_high);
        for (i, b) in &self.overrides {
            let _ = writeln!(s, "bias[{i}] = {b}");
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::DeviceSpec {
            line: 0,
            reason: format!("not UTF-8: {e}"),
        })?;
        Self::parse(text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

fn parse_u64(v: &str) -> std::result::Result<u64, String> {
    let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => v.parse(),
    };
    parsed.map_err(|_| format!("bad integer `{v}`"))
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    v.parse().map_err(|_| format!("bad number `{v}`"))
}
