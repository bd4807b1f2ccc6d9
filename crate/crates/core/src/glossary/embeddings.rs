use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Static word vectors keyed by token.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

/// Average of the vectors of a token list, along with the tokens that had no vector.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanVector {
    pub vector: Vec<f64>,
    pub missing: Vec<String>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingTable {
            dimension,
            vectors: HashMap::new(),
        })
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let token = token.into();
        if vector.len() != self.dimension {
            return Err(Error::Schema(format!(
                "vector for {token:?} has length {}, expected {}",
                vector.len(),
                self.dimension
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Schema(format!("vector for {token:?} is not finite")));
        }
        if self.vectors.insert(token.clone(), vector).is_some() {
            return Err(Error::Schema(format!("token {token:?} appears twice")));
        }
        Ok(())
    }

    pub fn from_pairs<I, S>(dimension: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = Self::new(dimension)?;
        for (token, v) in pairs {
            table.insert(token, v)?;
        }
        Ok(table)
    }

    /// Reads the text format: a `<count> <dimension>` header, then one
    /// `token v1 ... vd` line per token.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), &path.display().to_string())
    }

    pub fn read<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) => {
                    let line = line.map_err(|e| Error::io(source, e))?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::Schema(format!("{source}: missing header line"))),
            }
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Schema(format!("{source}: bad header {header:?}")))
        };
        if fields.len() != 2 {
            return Err(Error::Schema(format!("{source}: bad header {header:?}")));
        }
        let count = parse_usize(fields[0])?;
        let dimension = parse_usize(fields[1])?;
        let mut table = Self::new(dimension)?;
        for (lineno, line) in lines {
            let line = line.map_err(|e| Error::io(source, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-empty line has a token");
            let vector = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Schema(format!("{source}:{}: bad float", lineno + 1)))?;
            table
                .insert(token, vector)
                .map_err(|e| Error::Schema(format!("{source}:{}: {e}", lineno + 1)))?;
        }
        if table.len() != count {
            return Err(Error::Schema(format!(
                "{source}: header declares {count} vectors, found {}",
                table.len()
            )));
        }
        Ok(table)
    }

    /// Writes the text format with tokens in sorted order.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.len(), self.dimension));
        let mut tokens: Vec<_> = self.vectors.keys().collect();
        tokens.sort();
        for token in tokens {
            out.push_str(token);
            for x in &self.vectors[token] {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Vector for `token`, or the zero vector when it is not in the table.
    pub fn get_or_zero(&self, token: &str) -> Vec<f64> {
        self.get(token)
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| vec![0.0; self.dimension])
    }

    /// Mean of the token vectors; unknown tokens count as zero vectors.
    pub fn mean_vector<S: AsRef<str>>(&self, tokens: &[S]) -> MeanVector {
        let mut sum = vec![0.0; self.dimension];
        let mut missing = Vec::new();
        for t in tokens {
            match self.get(t.as_ref()) {
                Some(v) => sum.iter_mut().zip(v).for_each(|(s, x)| *s += x),
                None => missing.push(t.as_ref().to_string()),
            }
        }
        if !tokens.is_empty() {
            let n = tokens.len() as f64;
            sum.iter_mut().for_each(|s| *s /= n);
        }
        MeanVector {
            vector: sum,
            missing,
        }
    }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}
