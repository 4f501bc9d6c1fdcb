//! `key = value` configuration files. Command-line flags override file
//! values, which override built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use eventsem_core::{Error, Kernel, PoolMode, Result, RetrievalConfig, TextScoring};

const KEYS: &[&str] = &["kernel", "percentile", "mode", "r", "w", "k", "text_scoring"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::ParseLine {
                path: origin.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, found {line:?}")))?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(bad(format!("unknown key {key:?} (known: {})", KEYS.join(", "))));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidArgument(format!("config {key} = {v:?}: {e}")))
            })
            .transpose()
    }
}

/// Retrieval settings that can come from flags or the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kernel: Option<Kernel>,
    pub percentile: Option<f64>,
    pub mode: Option<PoolMode>,
    pub r: Option<usize>,
    pub w: Option<f64>,
    pub k: Option<usize>,
    pub text_scoring: Option<TextScoring>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub retrieval: RetrievalConfig,
    pub mode: PoolMode,
}

impl Overrides {
    pub fn resolve(&self, file: Option<&ConfigFile>) -> Result<Resolved> {
        let empty = ConfigFile::default();
        let file = file.unwrap_or(&empty);
        let defaults = RetrievalConfig::default();

        let mut kernel = match self.kernel {
            Some(k) => k,
            None => file.get::<Kernel>("kernel")?.unwrap_or(defaults.kernel),
        };
        let percentile = match self.percentile {
            Some(p) => Some(p),
            None => file.get::<f64>("percentile")?,
        };
        if let (Kernel::Hausdorff { percentile: p }, Some(l)) = (&mut kernel, percentile) {
            *p = l;
        }
        let retrieval = RetrievalConfig {
            kernel,
            top_r: pick(self.r, file.get("r")?, defaults.top_r),
            fusion_weight: pick(self.w, file.get("w")?, defaults.fusion_weight),
            augmentation_k: pick(self.k, file.get("k")?, defaults.augmentation_k),
            text_scoring: pick(self.text_scoring, file.get("text_scoring")?, defaults.text_scoring),
        };
        retrieval.validate()?;
        Ok(Resolved {
            retrieval,
            mode: pick(self.mode, file.get("mode")?, PoolMode::default()),
        })
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
