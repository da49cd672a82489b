//! Residual vector quantization of motion frames: hierarchical codebooks
//! over windowed, z-normalized channel features, split into body and hand
//! parts. Reconstruction is the sum of one code per layer.

mod features;
mod kmeans;
mod model;

use thiserror::Error;

pub use features::{frame_features, frame_windows, select_channels, unframe_windows, Part};
pub use kmeans::{kmeans, KMeansResult};
pub use model::{
    decode_latents, decode_to_clip, encode, encode_features, exhaustive_best_residual,
    greedy_residual, read_model, reconstruction_error, reconstruction_rmse, train_rvq, write_model,
    Codebook, RvqModel,
};

#[derive(Debug, Error, PartialEq)]
pub enum RvqError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("{codes} codes requested but only {samples} samples available")]
    CodesExceedSamples { codes: usize, samples: usize },
    #[error("motion is missing channel `{0}`")]
    MissingChannel(String),
    #[error("clip has {frames} frames, shorter than the {window}-frame window")]
    ClipShorterThanWindow { frames: usize, window: usize },
    #[error("window must be at least 1, got {0}")]
    BadWindow(usize),
    #[error("feature dimension {found} does not match the model's {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("token row has {found} layers, model has {expected}")]
    LayerCountMismatch { expected: usize, found: usize },
    #[error("frame {frame}: token {token} out of range for a {codes}-code layer")]
    TokenOutOfRange {
        frame: usize,
        token: usize,
        codes: usize,
    },
    #[error("model must have at least one layer")]
    NoLayers,
    #[error("bad model file: {0}")]
    BadModelFile(String),
    #[error("token text line {line}: {message}")]
    TokenParse { line: usize, message: String },
}

/// Token indices per frame, one column per quantizer layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStack {
    pub part: Part,
    /// `[frames x layers]` code indices.
    pub tokens: Vec<Vec<usize>>,
}

impl TokenStack {
    pub fn frame_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn layer_count(&self) -> usize {
        self.tokens.first().map(|t| t.len()).unwrap_or(0)
    }

    /// One line per frame, layer indices space-separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# part {}\n", self.part.tag()));
        for row in &self.tokens {
            let text: Vec<String> = row.iter().map(|t| t.to_string()).collect();
            out.push_str(&text.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<TokenStack, RvqError> {
        let mut part = Part::Body;
        let mut tokens = Vec::new();
        let mut width: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() == 2 && toks[0] == "part" {
                    part = Part::from_tag(toks[1]).ok_or(RvqError::TokenParse {
                        line,
                        message: format!("unknown part `{}`", toks[1]),
                    })?;
                }
                continue;
            }
            let row: Result<Vec<usize>, _> = trimmed
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| RvqError::TokenParse {
                        line,
                        message: format!("`{t}` is not a token index"),
                    })
                })
                .collect();
            let row = row?;
            if let Some(w) = width {
                if row.len() != w {
                    return Err(RvqError::TokenParse {
                        line,
                        message: format!("row has {} tokens, expected {w}", row.len()),
                    });
                }
            } else {
                width = Some(row.len());
            }
            tokens.push(row);
        }
        Ok(TokenStack { part, tokens })
    }
}
