//! Tokenization and an Okapi BM25 inverted index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Lowercases and splits on every non-alphanumeric character. No stemming,
/// no stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Short English stopword list used when extracting keywords from prose.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few",
    "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him",
    "his", "how", "however", "i", "if", "in", "into", "is", "it", "its", "itself", "may", "me",
    "more", "most", "my", "no", "nor", "not", "of", "off", "on", "once", "only", "or", "other",
    "our", "ours", "out", "over", "own", "same", "she", "should", "so", "some", "such", "than",
    "that", "the", "their", "theirs", "them", "then", "there", "these", "they", "this", "those",
    "through", "thus", "to", "too", "under", "until", "up", "upon", "using", "very", "via", "was",
    "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
    "within", "without", "would", "you", "your", "yours",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// The `n` most frequent non-stopword, non-numeric tokens across `texts`,
/// ties broken alphabetically.
pub fn top_terms<'a>(texts: impl IntoIterator<Item = &'a str>, n: usize) -> Vec<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for text in texts {
        for tok in tokenize(text) {
            if tok.chars().count() < 2 || is_stopword(&tok) || tok.chars().all(|c| c.is_numeric()) {
                continue;
            }
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().take(n).map(|(t, _)| t).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextError {
    DuplicateId(String),
    UnknownId(String),
    EmptyQuery,
    EmptyKeywords,
    ZeroTopM,
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextError::DuplicateId(id) => write!(f, "duplicate document id {id:?}"),
            TextError::UnknownId(id) => write!(f, "unknown document id {id:?}"),
            TextError::EmptyQuery => write!(f, "query has no tokens"),
            TextError::EmptyKeywords => write!(f, "keyword list has no tokens"),
            TextError::ZeroTopM => write!(f, "top_m must be at least 1"),
        }
    }
}

impl core::error::Error for TextError {}

#[derive(Debug, Clone)]
struct Doc {
    id: String,
    len: u32,
    tf: BTreeMap<String, u32>,
}

/// Inverted index scored with BM25.
///
/// The idf term is `ln(1 + (N - n + 0.5) / (n + 0.5))`, which stays
/// positive even for terms present in every document.
#[derive(Debug, Clone, Default)]
pub struct Bm25Index {
    params: Bm25Params,
    docs: Vec<Doc>,
    by_id: BTreeMap<String, usize>,
    postings: BTreeMap<String, Vec<(usize, u32)>>,
    total_len: u64,
}

impl Bm25Index {
    pub fn new(params: Bm25Params) -> Self {
        Self {
            params,
            ..Self::default()
        }
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn add_document(&mut self, id: &str, text: &str) -> Result<(), TextError> {
        if self.by_id.contains_key(id) {
            return Err(TextError::DuplicateId(id.into()));
        }
        let tokens = tokenize(text);
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in &tokens {
            *tf.entry(t.clone()).or_insert(0) += 1;
        }
        let idx = self.docs.len();
        for (term, &count) in &tf {
            self.postings.entry(term.clone()).or_default().push((idx, count));
        }
        self.total_len += tokens.len() as u64;
        self.by_id.insert(id.into(), idx);
        self.docs.push(Doc {
            id: id.into(),
            len: tokens.len() as u32,
            tf,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    /// Document ids in insertion order.
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.id.as_str())
    }

    pub fn doc_len(&self, id: &str) -> Option<u32> {
        self.by_id.get(id).map(|&i| self.docs[i].len)
    }

    pub fn avg_doc_len(&self) -> f64 {
        if self.docs.is_empty() {
            0.0
        } else {
            self.total_len as f64 / self.docs.len() as f64
        }
    }

    /// Number of documents containing `term`.
    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn term_freq(&self, id: &str, term: &str) -> Option<u32> {
        let &i = self.by_id.get(id)?;
        Some(self.docs[i].tf.get(term).copied().unwrap_or(0))
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.doc_freq(term) as f64;
        libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
    }

    /// BM25 score of one document for an already tokenized query. Repeated
    /// query tokens count once.
    pub fn score_tokens(&self, id: &str, query: &[String]) -> Option<f64> {
        let &i = self.by_id.get(id)?;
        let terms: BTreeSet<&str> = query.iter().map(String::as_str).collect();
        Some(terms.into_iter().map(|t| self.term_score(i, t)).sum())
    }

    fn term_score(&self, doc: usize, term: &str) -> f64 {
        let d = &self.docs[doc];
        let tf = match d.tf.get(term) {
            Some(&tf) => tf as f64,
            None => return 0.0,
        };
        let Bm25Params { k1, b } = self.params;
        let norm = 1.0 - b + b * d.len as f64 / self.avg_doc_len();
        self.idf(term) * tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// Top `top_m` documents with positive score, by score descending then id.
    pub fn search(&self, query: &str, top_m: usize) -> Result<Vec<(String, f64)>, TextError> {
        if top_m == 0 {
            return Err(TextError::ZeroTopM);
        }
        let tokens = tokenize(query);
        if tokens.is_empty() {
            return Err(TextError::EmptyQuery);
        }
        let terms: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        // Accumulate per document in a fixed term order so sums are reproducible.
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for term in terms {
            if let Some(post) = self.postings.get(term) {
                for &(doc, _) in post {
                    *acc.entry(doc).or_insert(0.0) += self.term_score(doc, term);
                }
            }
        }
        let mut hits: Vec<(String, f64)> = acc
            .into_iter()
            .filter(|&(_, s)| s > 0.0)
            .map(|(d, s)| (self.docs[d].id.clone(), s))
            .collect();
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        hits.truncate(top_m);
        Ok(hits)
    }

    /// Total occurrences of the keyword tokens in each listed document.
    /// Keywords are tokenized like documents; a keyword phrase contributes
    /// each of its tokens.
    pub fn keyword_frequency(
        &self,
        ids: &[&str],
        keywords: &[&str],
    ) -> Result<Vec<(String, u32)>, TextError> {
        let tokens: Vec<String> = keywords.iter().flat_map(|k| tokenize(k)).collect();
        if tokens.is_empty() {
            return Err(TextError::EmptyKeywords);
        }
        ids.iter()
            .map(|&id| {
                let &i = self
                    .by_id
                    .get(id)
                    .ok_or_else(|| TextError::UnknownId(id.into()))?;
                let tf = &self.docs[i].tf;
                let n = tokens.iter().map(|t| tf.get(t).copied().unwrap_or(0)).sum();
                Ok((id.into(), n))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn index(docs: &[(&str, &str)]) -> Bm25Index {
        let mut ix = Bm25Index::new(Bm25Params::default());
        for (id, text) in docs {
            ix.add_document(id, text).unwrap();
        }
        ix
    }

    #[test]
    fn tokenizer() {
        assert_eq!(
            tokenize("GSK3-beta, Kinase's (IC50)!"),
            vec!["gsk3", "beta", "kinase", "s", "ic50"]
        );
        assert_eq!(tokenize("ÉTUDE über"), vec!["étude", "über"]);
        assert!(tokenize(" -- ").is_empty());
    }

    #[test]
    fn stopwords_sorted() {
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
        assert!(is_stopword("the"));
        assert!(!is_stopword("kinase"));
    }

    #[test]
    fn top_terms_order() {
        let t = top_terms(["the kinase binds the kinase pocket", "pocket 42 x"], 3);
        assert_eq!(t, vec!["kinase", "pocket", "binds"]);
    }

    #[test]
    fn unique_term_ranks_alone() {
        let ix = index(&[("a", "alpha beta"), ("b", "beta gamma"), ("c", "gamma delta")]);
        let hits = ix.search("alpha", 10).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, "a");
    }

    #[test]
    fn symmetric_tie_by_id() {
        let ix = index(&[("z", "kinase x"), ("m", "kinase y"), ("a", "kinase w")]);
        let hits = ix.search("kinase", 10).unwrap();
        let ids: Vec<&str> = hits.iter().map(|h| h.0.as_str()).collect();
        assert_eq!(ids, ["a", "m", "z"]);
        assert_eq!(hits[0].1, hits[2].1);
    }

    #[test]
    fn errors() {
        let mut ix = index(&[("a", "x")]);
        assert_eq!(ix.search("...", 3), Err(TextError::EmptyQuery));
        assert_eq!(ix.search("x", 0), Err(TextError::ZeroTopM));
        assert_eq!(ix.add_document("a", "y"), Err(TextError::DuplicateId("a".into())));
        assert_eq!(
            ix.keyword_frequency(&["q"], &["x"]),
            Err(TextError::UnknownId("q".into()))
        );
        assert_eq!(ix.keyword_frequency(&["a"], &[" "]), Err(TextError::EmptyKeywords));
    }

    #[test]
    fn keyword_counts() {
        let ix = index(&[("a", "kinase kinase binding"), ("b", "nothing here")]);
        let f = ix.keyword_frequency(&["a", "b"], &["kinase"]).unwrap();
        assert_eq!(f, vec![("a".into(), 2), ("b".into(), 0)]);
        let f = ix.keyword_frequency(&["a"], &["Kinase binding"]).unwrap();
        assert_eq!(f[0].1, 3);
    }

    #[test]
    fn avg_len() {
        let ix = index(&[("a", "one two three"), ("b", "one")]);
        assert_eq!(ix.avg_doc_len(), 2.0);
        assert_eq!(ix.doc_freq("one"), 2);
        assert_eq!(ix.term_freq("a", "two"), Some(1));
    }
}
