//! The word-vector space: loading, lookup, token-set embedding, sum pooling
//! and exhaustive nearest-word search.
//!
//! Every vector is unit-normalized at load time, so downstream dot products
//! between single words are cosines.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::text::{tokenize, StopWordList};
use crate::vector;

/// On-disk layout of an embedding table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// Header `V M`, then `V` lines of `token f_1 ... f_M`.
    Text,
    /// Header `V M\n`, then per entry: token, a space, `M` little-endian
    /// `f32` values, and an optional newline.
    Binary,
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(Self::Text),
            "binary" | "bin" => Ok(Self::Binary),
            other => Err(Error::InvalidArgument(format!(
                "unknown embedding format {other:?} (expected text or binary)"
            ))),
        }
    }
}

/// Immutable token → unit vector table.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    dimension: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    duplicates: usize,
}

/// Tokens that did not make it into an [`EmbeddedSet`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OovReport {
    pub oov: Vec<String>,
    /// Adjacent token pairs replaced by a single phrase entry.
    pub phrases_merged: usize,
}

/// An ordered, non-empty list of vectors sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSet {
    vectors: Vec<Vec<f64>>,
    source_tokens: Vec<String>,
}

impl EmbeddedSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tokens(vectors, Vec::new())
    }

    pub fn with_tokens(vectors: Vec<Vec<f64>>, source_tokens: Vec<String>) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptySet)?;
        let dim = first.len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::WrongDimension {
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(Self { vectors, source_tokens })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn source_tokens(&self) -> &[String] {
        &self.source_tokens
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.vectors[0].len()
    }
}

/// Elementwise sum of the set's vectors. Not renormalized.
pub fn sum_pool(set: &EmbeddedSet) -> Vec<f64> {
    let mut acc = vec![0.0; set.dimension()];
    for v in set.vectors() {
        vector::add_assign(&mut acc, v);
    }
    acc
}

impl EmbeddingSpace {
    /// Builds a space from raw entries, normalizing each vector.
    ///
    /// Duplicate tokens keep their first occurrence. Rows are numbered from 1
    /// in error messages.
    pub fn from_entries<I>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dimension == 0 {
            return Err(Error::MalformedHeader("dimension must be positive".into()));
        }
        let mut space = Self {
            dimension,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            duplicates: 0,
        };
        for (row, (token, values)) in entries.into_iter().enumerate() {
            space.push(row + 1, token, &values)?;
        }
        if space.duplicates > 0 {
            log::warn!(
                "{} duplicate embedding tokens ignored (first occurrence kept)",
                space.duplicates
            );
        }
        Ok(space)
    }

    fn push(&mut self, row: usize, token: String, values: &[f64]) -> Result<()> {
        if values.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                row,
                expected: self.dimension,
                found: values.len(),
            });
        }
        let unit = vector::normalized(values).ok_or_else(|| Error::ZeroNormToken(token.clone()))?;
        if self.index.contains_key(&token) {
            self.duplicates += 1;
            return Ok(());
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(&unit);
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        match format {
            EmbeddingFormat::Text => Self::read_text(reader),
            EmbeddingFormat::Binary => Self::read_binary(reader),
        }
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::MalformedHeader(e.to_string()))?,
            None => return Err(Error::MalformedHeader("empty file".into())),
        };
        let (count, dimension) = parse_header(&header)?;

        let mut entries = Vec::with_capacity(count);
        let mut row = 0usize;
        for line in lines {
            let line = line.map_err(|e| Error::MalformedRow {
                row: row + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            row += 1;
            if row > count {
                return Err(Error::MalformedRow {
                    row,
                    message: format!("header declares {count} entries"),
                });
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap_or_default().to_string();
            let values = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::MalformedRow {
                        row,
                        message: format!("cannot parse {f:?} as a number"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != dimension {
                return Err(Error::DimensionMismatch {
                    row,
                    expected: dimension,
                    found: values.len(),
                });
            }
            entries.push((token, values));
        }
        if row != count {
            return Err(Error::MalformedRow {
                row,
                message: format!("header declares {count} entries, file has {row}"),
            });
        }
        Self::from_entries(dimension, entries)
    }

    pub fn read_binary<R: Read>(reader: R) -> Result<Self> {
        let mut reader = BufReader::new(reader);
        let mut header = String::new();
        reader
            .read_line(&mut header)
            .map_err(|e| Error::MalformedHeader(e.to_string()))?;
        let (count, dimension) = parse_header(&header)?;

        let mut entries = Vec::with_capacity(count);
        let mut buf = vec![0u8; dimension * 4];
        for row in 1..=count {
            let token = read_binary_token(&mut reader).map_err(|e| Error::MalformedRow {
                row,
                message: e.to_string(),
            })?;
            reader.read_exact(&mut buf).map_err(|_| Error::DimensionMismatch {
                row,
                expected: dimension,
                found: 0,
            })?;
            let values = buf
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                .collect();
            entries.push((token, values));
        }
        Self::from_entries(dimension, entries)
    }

    pub fn save(&self, path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        match format {
            EmbeddingFormat::Text => self.write_text(&mut w),
            EmbeddingFormat::Binary => self.write_binary(&mut w),
        }
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
    }

    /// Writes the text layout with nine significant digits per component.
    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dimension)?;
        for (i, token) in self.tokens.iter().enumerate() {
            write!(w, "{token}")?;
            for x in self.row(i) {
                write!(w, " {x:.8e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dimension)?;
        for (i, token) in self.tokens.iter().enumerate() {
            w.write_all(token.as_bytes())?;
            w.write_all(b" ")?;
            for &x in self.row(i) {
                w.write_all(&(x as f32).to_le_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of duplicate tokens skipped while loading.
    pub fn duplicate_tokens(&self) -> usize {
        self.duplicates
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// The unit vector for `token`, or `None` when it is out of vocabulary.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Looks up stop-filtered tokens, first trying to join each adjacent pair
    /// as an underscore phrase (`new_york`). Greedy, left to right, bigrams
    /// only.
    pub fn embed_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Result<(EmbeddedSet, OovReport)> {
        let mut vectors = Vec::new();
        let mut sources = Vec::new();
        let mut report = OovReport::default();
        let mut i = 0;
        while i < tokens.len() {
            let tok = tokens[i].as_ref();
            if let Some(next) = tokens.get(i + 1) {
                let phrase = format!("{tok}_{}", next.as_ref());
                if let Some(v) = self.get(&phrase) {
                    vectors.push(v.to_vec());
                    sources.push(phrase);
                    report.phrases_merged += 1;
                    i += 2;
                    continue;
                }
            }
            match self.get(tok) {
                Some(v) => {
                    vectors.push(v.to_vec());
                    sources.push(tok.to_string());
                }
                None => report.oov.push(tok.to_string()),
            }
            i += 1;
        }
        if vectors.is_empty() {
            return Err(Error::AllTokensOov(
                tokens.iter().map(|t| t.as_ref().to_string()).collect(),
            ));
        }
        Ok((
            EmbeddedSet {
                vectors,
                source_tokens: sources,
            },
            report,
        ))
    }

    /// Tokenizes and embeds free text.
    pub fn embed_text(&self, text: &str, stops: &StopWordList) -> Result<(EmbeddedSet, OovReport)> {
        self.embed_tokens(&tokenize(text, stops))
    }

    /// Top-`k` vocabulary tokens by cosine to `point`, descending, ties
    /// broken by token order. Tokens in `exclude` are never returned.
    pub fn nearest_words(&self, point: &[f64], k: usize, exclude: &HashSet<String>) -> Result<Vec<(String, f64)>> {
        if point.len() != self.dimension {
            return Err(Error::WrongDimension {
                expected: self.dimension,
                found: point.len(),
            });
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let pnorm = vector::norm(point);
        if pnorm == 0.0 || !pnorm.is_finite() {
            return Err(Error::ZeroNorm);
        }

        let mut scored: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| !exclude.contains(&self.tokens[i]))
            .map(|i| (vector::dot(point, self.row(i)) / pnorm, i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| {
            b.0.total_cmp(&a.0)
                .then_with(|| self.tokens[a.1].cmp(&self.tokens[b.1]))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(order);
        Ok(scored
            .into_iter()
            .map(|(cos, i)| (self.tokens[i].clone(), cos))
            .collect())
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let mut parts = header.split_whitespace();
    let (Some(v), Some(m), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::MalformedHeader(format!(
            "expected \"V M\", found {:?}",
            header.trim_end()
        )));
    };
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::MalformedHeader(format!("{s:?} is not a count")))
    };
    let (count, dimension) = (parse(v)?, parse(m)?);
    if dimension == 0 {
        return Err(Error::MalformedHeader("dimension must be positive".into()));
    }
    Ok((count, dimension))
}

fn read_binary_token<R: BufRead>(reader: &mut R) -> std::io::Result<String> {
    let mut bytes = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        reader.read_exact(&mut byte)?;
        match byte[0] {
            b'\n' | b'\r' if bytes.is_empty() => continue,
            b' ' => break,
            b => bytes.push(b),
        }
    }
    String::from_utf8(bytes).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
