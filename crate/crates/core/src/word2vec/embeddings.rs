use alloc::string::String;
use alloc::vec::Vec;

use super::vocab::Vocabulary;
use crate::corpus::LanguageLabel;
use crate::linalg::{dot, norm};
use crate::{Error, Result};

/// Trained word vectors. Queries use unit-normalized copies of the input
/// matrix rows, computed once at construction.
#[derive(Debug, Clone)]
pub struct WordEmbeddings {
    vocab: Vocabulary,
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
    language: Option<LanguageLabel>,
    unit: Vec<f64>,
}

impl WordEmbeddings {
    pub fn new(
        vocab: Vocabulary,
        dim: usize,
        input: Vec<f32>,
        output: Vec<f32>,
        language: Option<LanguageLabel>,
    ) -> Result<Self> {
        let expected = vocab.len() * dim;
        for m in [&input, &output] {
            if m.len() != expected {
                return Err(Error::DimensionMismatch { expected, actual: m.len() });
            }
        }
        if input.iter().chain(&output).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("embedding matrices contain non-finite values".into()));
        }
        let mut unit = Vec::with_capacity(expected);
        for row in input.chunks_exact(dim.max(1)) {
            let wide: Vec<f64> = row.iter().map(|&x| f64::from(x)).collect();
            let n = norm(&wide);
            unit.extend(wide.iter().map(|x| if n > 0.0 { x / n } else { 0.0 }));
        }
        Ok(WordEmbeddings { vocab, dim, input, output, language, unit })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input(&self) -> &[f32] {
        &self.input
    }

    pub fn output(&self) -> &[f32] {
        &self.output
    }

    pub fn language(&self) -> Option<LanguageLabel> {
        self.language
    }

    pub fn with_language(mut self, language: LanguageLabel) -> Self {
        self.language = Some(language);
        self
    }

    /// Raw input-matrix row.
    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.vocab.index_of(token).map(|i| &self.input[i * self.dim..(i + 1) * self.dim])
    }

    pub fn unit_row(&self, index: usize) -> &[f64] {
        &self.unit[index * self.dim..(index + 1) * self.dim]
    }

    /// Unit-normalized vector of a token; all zeros for a zero row.
    pub fn unit_vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.index_of(token).map(|i| self.unit_row(i))
    }

    fn require(&self, token: &str) -> Result<usize> {
        self.vocab.index_of(token).ok_or_else(|| Error::OutOfVocabulary(token.into()))
    }

    /// Cosine between two vocabulary tokens.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        let (a, b) = (self.require(a)?, self.require(b)?);
        let (ua, ub) = (self.unit_row(a), self.unit_row(b));
        if norm(ua) == 0.0 || norm(ub) == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(dot(ua, ub).clamp(-1.0, 1.0))
    }

    /// Top-`k` tokens by cosine to `query`, excluding the query itself.
    /// Ties go to the lexicographically smaller token.
    pub fn nearest_words(&self, query: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let q = self.require(query)?;
        if k == 0 {
            return Ok(Vec::new());
        }
        let qv = self.unit_row(q);
        let mut scored: Vec<(usize, f64)> =
            (0..self.vocab.len()).filter(|&i| i != q).map(|i| (i, dot(qv, self.unit_row(i)))).collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.vocab.token(a.0).cmp(self.vocab.token(b.0))));
        scored.truncate(k);
        Ok(scored.into_iter().map(|(i, s)| (self.vocab.token(i).into(), s)).collect())
    }
}
