//! Config file loading and backend wiring.
//!
//! ```json
//! {
//!   "embedder":   {"base_url": "...", "model_name": "...", "api_key_env": "..."},
//!   "reranker":   {...},
//!   "translator": {..., "language_code_map": {"ko": "kor_Hang"}},
//!   "judge":      {...},
//!   "generator":  {...},
//!   "pipeline":   {"top_k": 50, "top_n": 5, "threshold": 3.5},
//!   "languages":  {"sw": "Swahili"},
//!   "prompts_dir": "path/to/prompts"
//! }
//! ```
//!
//! Command-line flags override `pipeline`; `api_key_env` overrides keys.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use qttrag::backends::http::{HttpChat, HttpEmbedder, HttpReranker, HttpTranslator};
use qttrag::backends::mock::HashEmbedder;
use qttrag::quality::MockJudge;
use qttrag::{BackendConfig, Backends, ChatBackend, Embedder, LanguageCode, PipelineConfig, PromptSet};

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub embedder: Option<BackendConfig>,
    pub reranker: Option<BackendConfig>,
    pub translator: Option<BackendConfig>,
    pub judge: Option<BackendConfig>,
    pub generator: Option<BackendConfig>,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    /// Extra query languages served by the English templates.
    #[serde(default)]
    pub languages: BTreeMap<LanguageCode, String>,
    pub prompts_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let mut config: FileConfig = serde_json::from_str(&raw)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        // Relative prompt directories resolve against the config file.
        if let (Some(dir), Some(parent)) = (&config.prompts_dir, path.parent()) {
            if dir.is_relative() {
                config.prompts_dir = Some(parent.join(dir));
            }
        }
        Ok(config)
    }

    pub fn prompts(&self) -> Result<PromptSet, Failure> {
        let mut set = match &self.prompts_dir {
            Some(dir) => PromptSet::load_dir(dir).map_err(|e| Failure::config(e.to_string()))?,
            None => PromptSet::builtin(),
        };
        for (lang, name) in &self.languages {
            set.register_language(*lang, name);
        }
        Ok(set)
    }

    fn role(&self, name: &str) -> Result<BackendConfig, Failure> {
        let config = match name {
            "embedder" => &self.embedder,
            "reranker" => &self.reranker,
            "translator" => &self.translator,
            "judge" => &self.judge,
            _ => &self.generator,
        };
        config
            .clone()
            .ok_or_else(|| Failure::config(format!("no `{name}` backend configured (pass --config or --mock)")))
    }

    pub fn embedder(&self, mock: bool) -> Result<Arc<dyn Embedder>, Failure> {
        if mock {
            return Ok(Arc::new(HashEmbedder::default()));
        }
        Ok(Arc::new(HttpEmbedder::new(self.role("embedder")?).map_err(Failure::from_backend)?))
    }

    pub fn judge(&self, mock: bool, prompts: &PromptSet) -> Result<Arc<dyn ChatBackend>, Failure> {
        if mock {
            return Ok(Arc::new(MockJudge::new(prompts)));
        }
        Ok(Arc::new(HttpChat::new(self.role("judge")?).map_err(Failure::from_backend)?))
    }

    pub fn backends(&self, mock: bool, prompts: &PromptSet) -> Result<Backends, Failure> {
        if mock {
            return Ok(Backends::mock(prompts));
        }
        let wrap = Failure::from_backend;
        Ok(Backends {
            embedder: self.embedder(false)?,
            reranker: Arc::new(HttpReranker::new(self.role("reranker")?).map_err(wrap)?),
            translator: Arc::new(HttpTranslator::new(self.role("translator")?).map_err(wrap)?),
            judge: self.judge(false, prompts)?,
            generator: Arc::new(HttpChat::new(self.role("generator")?).map_err(wrap)?),
        })
    }
}
