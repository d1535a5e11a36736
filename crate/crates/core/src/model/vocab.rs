//! Corpus-trained subword vocabulary with byte fallback.
//!
//! Ids are laid out as: special tokens, 256 byte tokens, then the learned
//! alphabet and merges in training order. Subwords never cross word
//! boundaries produced by [`tokenize_raw`](crate::annotate::tokenize_raw),
//! so encoding works one word at a time.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::annotate::tokenize_raw;
use crate::error::{Error, Result};

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const MASK: &str = "[MASK]";

pub const SPECIAL_TOKENS: [&str; 5] = [PAD, UNK, CLS, SEP, MASK];
const BYTE_BASE: u32 = SPECIAL_TOKENS.len() as u32;
const FIRST_LEARNED: u32 = BYTE_BASE + 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecialIds {
    pub pad: u32,
    pub unk: u32,
    pub cls: u32,
    pub sep: u32,
    pub mask: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "VocabData", try_from = "VocabData")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    merges: Vec<(u32, u32)>,
    merge_rank: HashMap<(u32, u32), (usize, u32)>,
}

/// Serialized form: learned tokens in id order and the merge list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VocabData {
    pub learned: Vec<String>,
    pub merges: Vec<(u32, u32)>,
}

impl From<Vocabulary> for VocabData {
    fn from(v: Vocabulary) -> Self {
        VocabData { learned: v.tokens[FIRST_LEARNED as usize..].to_vec(), merges: v.merges }
    }
}

impl TryFrom<VocabData> for Vocabulary {
    type Error = Error;

    fn try_from(d: VocabData) -> Result<Self> {
        Vocabulary::from_parts(d.learned, d.merges)
    }
}

fn byte_token(b: u8) -> String {
    format!("<0x{b:02X}>")
}

impl Vocabulary {
    fn from_parts(learned: Vec<String>, merges: Vec<(u32, u32)>) -> Result<Self> {
        let mut tokens: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        tokens.extend((0..=255u8).map(byte_token));
        tokens.extend(learned);
        let mut index = HashMap::new();
        for (i, t) in tokens.iter().enumerate().skip(FIRST_LEARNED as usize) {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary entry {t:?}")));
            }
        }
        let mut merge_rank = HashMap::new();
        for (rank, &(a, b)) in merges.iter().enumerate() {
            let (ta, tb) = (
                tokens.get(a as usize).ok_or_else(|| Error::Config(format!("merge refers to id {a}")))?,
                tokens.get(b as usize).ok_or_else(|| Error::Config(format!("merge refers to id {b}")))?,
            );
            let merged = format!("{ta}{tb}");
            let id = *index
                .get(&merged)
                .ok_or_else(|| Error::Config(format!("merge result {merged:?} missing from vocabulary")))?;
            merge_rank.insert((a, b), (rank, id));
        }
        Ok(Vocabulary { tokens, index, merges, merge_rank })
    }

    /// Train on a corpus of raw texts.
    ///
    /// `target_size` counts special tokens, the learned alphabet and merges;
    /// the 256 byte-fallback entries come on top. Characters are admitted by
    /// frequency, then the most frequent adjacent pair is merged until the
    /// target is reached (ties go to the lexicographically smaller pair).
    pub fn build<'a>(corpus: impl IntoIterator<Item = &'a str>, target_size: usize) -> Result<Self> {
        if target_size < SPECIAL_TOKENS.len() {
            return Err(Error::Config(format!(
                "vocabulary size {target_size} is smaller than the {} special tokens",
                SPECIAL_TOKENS.len()
            )));
        }
        let mut word_freq: BTreeMap<String, u64> = BTreeMap::new();
        for text in corpus {
            for tok in tokenize_raw(text) {
                *word_freq.entry(tok.text).or_default() += 1;
            }
        }
        if word_freq.is_empty() {
            return Err(Error::Config("cannot build a vocabulary from an empty corpus".into()));
        }

        let mut char_freq: BTreeMap<char, u64> = BTreeMap::new();
        for (w, &f) in &word_freq {
            for c in w.chars() {
                *char_freq.entry(c).or_default() += f;
            }
        }
        let mut alphabet: Vec<(char, u64)> = char_freq.into_iter().collect();
        alphabet.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let budget = target_size - SPECIAL_TOKENS.len();
        alphabet.truncate(budget);

        let mut learned: Vec<String> = alphabet.iter().map(|(c, _)| c.to_string()).collect();
        let mut index: HashMap<String, u32> =
            learned.iter().enumerate().map(|(i, t)| (t.clone(), FIRST_LEARNED + i as u32)).collect();

        // words as symbol sequences; symbols outside the alphabet are barriers (None)
        let mut words: Vec<(Vec<Option<u32>>, u64)> = word_freq
            .iter()
            .map(|(w, &f)| (w.chars().map(|c| index.get(&c.to_string()).copied()).collect(), f))
            .collect();

        let mut merges = Vec::new();
        while learned.len() < budget {
            let mut pair_freq: HashMap<(u32, u32), u64> = HashMap::new();
            for (syms, f) in &words {
                for w in syms.windows(2) {
                    if let (Some(a), Some(b)) = (w[0], w[1]) {
                        *pair_freq.entry((a, b)).or_default() += f;
                    }
                }
            }
            let tok = |id: u32| &learned[(id - FIRST_LEARNED) as usize];
            let best = pair_freq
                .into_iter()
                .filter(|(p, _)| !index.contains_key(&format!("{}{}", tok(p.0), tok(p.1))))
                .max_by(|(pa, fa), (pb, fb)| {
                    fa.cmp(fb).then_with(|| (tok(pb.0), tok(pb.1)).cmp(&(tok(pa.0), tok(pa.1))))
                });
            let Some(((a, b), _)) = best else { break };
            let merged = format!("{}{}", tok(a), tok(b));
            let new_id = FIRST_LEARNED + learned.len() as u32;
            learned.push(merged.clone());
            index.insert(merged, new_id);
            merges.push((a, b));
            for (syms, _) in &mut words {
                *syms = apply_merge(syms, (a, b), new_id);
            }
        }
        Self::from_parts(learned, merges)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn special(&self) -> SpecialIds {
        SpecialIds { pad: 0, unk: 1, cls: 2, sep: 3, mask: 4 }
    }

    /// Ids eligible as random replacements: everything but the special tokens.
    pub fn first_regular_id(&self) -> u32 {
        BYTE_BASE
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        if let Some(pos) = SPECIAL_TOKENS.iter().position(|s| *s == token) {
            return Some(pos as u32);
        }
        self.index.get(token).copied()
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    /// Encode a single word (no whitespace) into subword ids.
    pub fn encode_word(&self, word: &str) -> Vec<u32> {
        let mut syms: Vec<u32> = Vec::with_capacity(word.len());
        let mut buf = [0u8; 4];
        for c in word.chars() {
            let s = c.encode_utf8(&mut buf);
            match self.index.get(&*s) {
                Some(&id) => syms.push(id),
                None => syms.extend(s.bytes().map(|b| BYTE_BASE + u32::from(b))),
            }
        }
        loop {
            let best = syms
                .windows(2)
                .enumerate()
                .filter_map(|(i, w)| self.merge_rank.get(&(w[0], w[1])).map(|&(rank, id)| (rank, i, id)))
                .min();
            let Some((_, i, id)) = best else { break };
            syms[i] = id;
            syms.remove(i + 1);
        }
        syms
    }

    /// Encode text word by word.
    pub fn encode_text(&self, text: &str) -> Vec<Vec<u32>> {
        tokenize_raw(text).iter().map(|t| self.encode_word(&t.text)).collect()
    }

    /// Inverse of [`Vocabulary::encode_word`]; special tokens render by name.
    pub fn decode_word(&self, ids: &[u32]) -> String {
        let mut bytes = Vec::new();
        for &id in ids {
            if (BYTE_BASE..FIRST_LEARNED).contains(&id) {
                bytes.push((id - BYTE_BASE) as u8);
            } else if let Some(t) = self.token(id) {
                bytes.extend_from_slice(t.as_bytes());
            }
        }
        String::from_utf8_lossy(&bytes).into_owned()
    }

    /// Words joined by single spaces.
    pub fn decode_text(&self, words: &[Vec<u32>]) -> String {
        words.iter().map(|w| self.decode_word(w)).collect::<Vec<_>>().join(" ")
    }
}

fn apply_merge(syms: &[Option<u32>], pair: (u32, u32), new_id: u32) -> Vec<Option<u32>> {
    let mut out = Vec::with_capacity(syms.len());
    let mut i = 0;
    while i < syms.len() {
        if i + 1 < syms.len() && syms[i] == Some(pair.0) && syms[i + 1] == Some(pair.1) {
            out.push(Some(new_id));
            i += 2;
        } else {
            out.push(syms[i]);
            i += 1;
        }
    }
    out
}
