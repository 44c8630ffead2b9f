//! Deterministic rule-based editing operator producing synthetic AI-like
//! edits of controllable intensity.
//!
//! An edit is a sequence of micro-edits (word deletions, substitutions,
//! typos, sentence swaps, sentence rewrites) chosen pseudo-randomly from
//! `(source, lambda, seed, profile)` and applied one at a time. Each op is a
//! deterministic function of the text it is applied to, so replaying the
//! recorded ops on the source reproduces the edited text byte for byte.

use serde::{Deserialize, Serialize};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::embedding::hash64;
use crate::error::{Error, Result};
use crate::lexicon::{builtin_fillers, builtin_templates, SynonymTable};

/// How invasive the synthetic editor is. Profiles escalate: proofread only
/// injects typo fixes gone wrong, rewrite substitutes, reorders, and applies
/// sentence templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditProfile {
    Proofread,
    Paraphrase,
    Restructure,
    Rewrite,
}

impl EditProfile {
    pub const ALL: [EditProfile; 4] = [
        EditProfile::Proofread,
        EditProfile::Paraphrase,
        EditProfile::Restructure,
        EditProfile::Rewrite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EditProfile::Proofread => "proofread",
            EditProfile::Paraphrase => "paraphrase",
            EditProfile::Restructure => "restructure",
            EditProfile::Rewrite => "rewrite",
        }
    }

    /// Prompt-category label the profile stands in for.
    pub fn prompt_category(&self) -> &'static str {
        match self {
            EditProfile::Proofread => "Grammar and Mechanics",
            EditProfile::Paraphrase => "Paraphrasing",
            EditProfile::Restructure => "Structure and Organization",
            EditProfile::Rewrite => "Tone and Style Adjustments",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "proofread" => Ok(EditProfile::Proofread),
            "paraphrase" => Ok(EditProfile::Paraphrase),
            "restructure" => Ok(EditProfile::Restructure),
            "rewrite" => Ok(EditProfile::Rewrite),
            other => Err(Error::invalid(format!("unknown edit profile: {other}"))),
        }
    }

    fn params(&self) -> ProfileParams {
        match self {
            EditProfile::Proofread => ProfileParams {
                word_rate: 0.08,
                substitute_weight: 0.0,
                delete_weight: 0.0,
                swap_rate: 0.0,
                template_rate: 0.0,
            },
            EditProfile::Paraphrase => ProfileParams {
                word_rate: 0.22,
                substitute_weight: 0.75,
                delete_weight: 0.15,
                swap_rate: 0.0,
                template_rate: 0.0,
            },
            EditProfile::Restructure => ProfileParams {
                word_rate: 0.10,
                substitute_weight: 1.0,
                delete_weight: 0.0,
                swap_rate: 0.6,
                template_rate: 0.0,
            },
            EditProfile::Rewrite => ProfileParams {
                word_rate: 0.5,
                substitute_weight: 0.8,
                delete_weight: 0.1,
                swap_rate: 0.4,
                template_rate: 0.5,
            },
        }
    }
}

struct ProfileParams {
    word_rate: f64,
    /// Probability mass for substitutions; deletions take `delete_weight`
    /// and typos the remainder.
    substitute_weight: f64,
    delete_weight: f64,
    swap_rate: f64,
    template_rate: f64,
}

/// One micro-edit. Indices refer to the text state the op is applied to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MicroEdit {
    DeleteWord { index: usize },
    SubstituteWord { index: usize, new: String },
    SwapSentences { first: usize, second: usize },
    InjectTypo { index: usize },
    RewriteSentence { index: usize, template_id: usize },
}

/// The full record of one edit: replaying `ops` on the source reproduces
/// the edited text byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditTrace {
    pub ops: Vec<MicroEdit>,
    pub lambda: f64,
    pub seed: u64,
    pub profile: EditProfile,
}

/// Applies a synthetic edit of intensity `lambda` in `[0, 1]`.
/// Deterministic in `(source, lambda, seed, profile)`; `lambda = 0` returns
/// the source unchanged with an empty trace.
pub fn apply_edit(
    source: &str,
    lambda: f64,
    seed: u64,
    profile: EditProfile,
) -> Result<(String, EditTrace)> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("lambda must be in [0, 1], got {lambda}")));
    }
    let word_count = source.split_whitespace().count();
    if word_count == 0 {
        return Err(Error::invalid("cannot edit an empty source"));
    }
    let mut trace = EditTrace {
        ops: Vec::new(),
        lambda,
        seed,
        profile,
    };
    if lambda == 0.0 {
        return Ok((source.to_string(), trace));
    }

    let params = profile.params();
    let mut rng = ChaCha8Rng::seed_from_u64(hash64(&[
        &seed.to_le_bytes(),
        &lambda.to_bits().to_le_bytes(),
        profile.name().as_bytes(),
        source.as_bytes(),
    ]));
    let synonyms = SynonymTable::builtin();
    let fillers = builtin_fillers();
    let templates = builtin_templates();
    let mut text = source.to_string();

    let sentence_count = split_sentences(&text).1.len();
    let n_swaps = (lambda * sentence_count as f64 * params.swap_rate).round() as usize;
    for _ in 0..n_swaps {
        let (_, sentences) = split_sentences(&text);
        if sentences.len() < 2 {
            break;
        }
        let first = rng.gen_range(0..sentences.len() - 1);
        let second = rng.gen_range(first + 1..sentences.len());
        let op = MicroEdit::SwapSentences { first, second };
        text = apply_op(&text, &op)?;
        trace.ops.push(op);
    }

    let n_templates = (lambda * sentence_count as f64 * params.template_rate).round() as usize;
    for _ in 0..n_templates {
        let (_, sentences) = split_sentences(&text);
        if sentences.is_empty() {
            break;
        }
        let index = rng.gen_range(0..sentences.len());
        let template_id = rng.gen_range(0..templates.len());
        let op = MicroEdit::RewriteSentence { index, template_id };
        text = apply_op(&text, &op)?;
        trace.ops.push(op);
    }

    let n_word_ops = (lambda * word_count as f64 * params.word_rate).round() as usize;
    for _ in 0..n_word_ops {
        let (_, words, _) = split_words(&text);
        if words.is_empty() {
            break;
        }
        let index = rng.gen_range(0..words.len());
        let roll: f64 = rng.gen();
        let op = if roll < params.substitute_weight {
            let new = substitution_for(&words[index], synonyms, fillers, &mut rng);
            MicroEdit::SubstituteWord { index, new }
        } else if roll < params.substitute_weight + params.delete_weight && words.len() >= 2 {
            MicroEdit::DeleteWord { index }
        } else {
            MicroEdit::InjectTypo { index }
        };
        text = apply_op(&text, &op)?;
        trace.ops.push(op);
    }

    Ok((text, trace))
}

/// Applies `k` edits in sequence, edit `i` operating on the output of edit
/// `i - 1`. Returns every intermediate text with its trace.
pub fn apply_edit_sequence(
    source: &str,
    lambdas: &[f64],
    seeds: &[u64],
    profiles: &[EditProfile],
) -> Result<Vec<(String, EditTrace)>> {
    if lambdas.len() != seeds.len() || seeds.len() != profiles.len() {
        return Err(Error::invalid(format!(
            "edit sequence lengths differ: {} lambdas, {} seeds, {} profiles",
            lambdas.len(),
            seeds.len(),
            profiles.len()
        )));
    }
    let mut out = Vec::with_capacity(lambdas.len());
    let mut current = source.to_string();
    for i in 0..lambdas.len() {
        let (edited, trace) = apply_edit(&current, lambdas[i], seeds[i], profiles[i])?;
        current = edited.clone();
        out.push((edited, trace));
    }
    Ok(out)
}

/// Replays a trace against a source text. Byte-identical to the original
/// edit when applied to the original source.
pub fn replay(source: &str, trace: &EditTrace) -> Result<String> {
    let mut text = source.to_string();
    for op in &trace.ops {
        text = apply_op(&text, op)?;
    }
    Ok(text)
}

fn substitution_for(
    word: &str,
    synonyms: &SynonymTable,
    fillers: &[String],
    rng: &mut ChaCha8Rng,
) -> String {
    let (prefix, core, suffix) = split_word_edges(word);
    let lower = core.to_lowercase();
    let replacement = match synonyms.group_of(&lower) {
        Some(group) => {
            let alternatives: Vec<&String> = group.iter().filter(|w| **w != lower).collect();
            if alternatives.is_empty() {
                fillers[rng.gen_range(0..fillers.len())].clone()
            } else {
                alternatives[rng.gen_range(0..alternatives.len())].clone()
            }
        }
        None => fillers[rng.gen_range(0..fillers.len())].clone(),
    };
    let replacement = match_capitalization(core, &replacement);
    format!("{prefix}{replacement}{suffix}")
}

fn match_capitalization(original: &str, replacement: &str) -> String {
    if original.chars().next().is_some_and(|c| c.is_uppercase()) {
        let mut chars = replacement.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    } else {
        replacement.to_string()
    }
}

/// Splits a whitespace-delimited chunk into (leading punctuation, core,
/// trailing punctuation).
fn split_word_edges(word: &str) -> (&str, &str, &str) {
    let start = word
        .char_indices()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, _)| i)
        .unwrap_or(word.len());
    let end = word
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(word.len());
    if start >= end {
        return ("", word, "");
    }
    (&word[..start], &word[start..end], &word[end..])
}

/// Applies a single micro-edit to `text`. This is the one code path shared
/// by generation and replay.
pub fn apply_op(text: &str, op: &MicroEdit) -> Result<String> {
    match op {
        MicroEdit::DeleteWord { index } => {
            let (lead, mut words, mut seps) = split_words(text);
            check_index(*index, words.len(), "word")?;
            words.remove(*index);
            if *index < seps.len() {
                seps.remove(*index);
            } else if !seps.is_empty() {
                seps.remove(seps.len() - 1);
            }
            Ok(join_words(&lead, &words, &seps))
        }
        MicroEdit::SubstituteWord { index, new } => {
            let (lead, mut words, seps) = split_words(text);
            check_index(*index, words.len(), "word")?;
            words[*index] = new.clone();
            Ok(join_words(&lead, &words, &seps))
        }
        MicroEdit::InjectTypo { index } => {
            let (lead, mut words, seps) = split_words(text);
            check_index(*index, words.len(), "word")?;
            words[*index] = typo_of(&words[*index]);
            Ok(join_words(&lead, &words, &seps))
        }
        MicroEdit::SwapSentences { first, second } => {
            let (lead, mut sentences) = split_sentences(text);
            check_index(*first, sentences.len(), "sentence")?;
            check_index(*second, sentences.len(), "sentence")?;
            let tmp = sentences[*first].body.clone();
            sentences[*first].body = sentences[*second].body.clone();
            sentences[*second].body = tmp;
            Ok(join_sentences(&lead, &sentences))
        }
        MicroEdit::RewriteSentence { index, template_id } => {
            let templates = builtin_templates();
            check_index(*index, usize::MAX, "sentence")?; // real bound checked below
            if *template_id >= templates.len() {
                return Err(Error::invalid(format!(
                    "template id {template_id} out of range ({} templates)",
                    templates.len()
                )));
            }
            let (lead, mut sentences) = split_sentences(text);
            check_index(*index, sentences.len(), "sentence")?;
            sentences[*index].body = rewrite_sentence(&sentences[*index].body, &templates[*template_id]);
            Ok(join_sentences(&lead, &sentences))
        }
    }
}

fn check_index(index: usize, len: usize, what: &str) -> Result<()> {
    if len != usize::MAX && index >= len {
        return Err(Error::invalid(format!(
            "{what} index {index} out of range for length {len}"
        )));
    }
    Ok(())
}

/// Deterministic typo for a word: the kind and position derive from a hash
/// of the word's content, so replay needs no randomness.
fn typo_of(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    let h = hash64(&[word.as_bytes()]);
    let len = chars.len();
    let mut out = chars.clone();
    if len >= 3 && h % 3 == 0 {
        // Swap two adjacent interior characters.
        let p = 1 + ((h >> 8) as usize % (len - 2));
        out.swap(p, p + 1);
    } else if len >= 2 && h % 3 == 1 {
        // Drop a character.
        let p = (h >> 8) as usize % len;
        out.remove(p);
    } else {
        // Double a character.
        let p = if len == 0 { 0 } else { (h >> 8) as usize % len };
        let c = out.get(p).copied().unwrap_or('x');
        out.insert(p, c);
    }
    out.into_iter().collect()
}

fn rewrite_sentence(body: &str, template: &str) -> String {
    let trimmed = body.trim_end();
    let (core, terminal) = match trimmed.rfind(|c: char| !matches!(c, '.' | '!' | '?')) {
        Some(last) => {
            let cut = last + trimmed[last..].chars().next().map_or(1, |c| c.len_utf8());
            (&trimmed[..cut], &trimmed[cut..])
        }
        None => (trimmed, ""),
    };
    let terminal = if terminal.is_empty() { "." } else { terminal };
    if template == "{reorder}" {
        let words: Vec<&str> = core.split_whitespace().collect();
        if words.len() < 4 {
            return body.to_string();
        }
        let mid = words.len() / 2;
        let mut reordered = words[mid..].join(" ");
        reordered.push_str(", ");
        reordered.push_str(&words[..mid].join(" ").to_lowercase());
        reordered.push_str(terminal);
        return reordered;
    }
    let mut lowered = String::with_capacity(core.len());
    let mut chars = core.chars();
    if let Some(first) = chars.next() {
        lowered.extend(first.to_lowercase());
        lowered.push_str(chars.as_str());
    }
    format!("{}{}", template.replace("{s}", &lowered), terminal)
}

/// Splits into (leading whitespace, words, separators following each word).
/// Rebuild with [`join_words`] is byte-exact.
fn split_words(text: &str) -> (String, Vec<String>, Vec<String>) {
    let mut lead = String::new();
    let mut words = Vec::new();
    let mut seps = Vec::new();
    let mut current = String::new();
    let mut in_word = false;
    for c in text.chars() {
        if c.is_whitespace() {
            if in_word {
                words.push(std::mem::take(&mut current));
                in_word = false;
            }
            current.push(c);
        } else {
            if !in_word {
                if words.is_empty() {
                    lead = std::mem::take(&mut current);
                } else {
                    seps.push(std::mem::take(&mut current));
                }
                in_word = true;
            }
            current.push(c);
        }
    }
    if in_word {
        words.push(current);
    } else if words.is_empty() {
        lead = current;
    } else {
        seps.push(current);
    }
    (lead, words, seps)
}

fn join_words(lead: &str, words: &[String], seps: &[String]) -> String {
    let mut out = String::from(lead);
    for (i, word) in words.iter().enumerate() {
        out.push_str(word);
        if let Some(sep) = seps.get(i) {
            out.push_str(sep);
        } else if i + 1 < words.len() {
            out.push(' ');
        }
    }
    if words.is_empty() {
        out.push_str(&seps.concat());
    }
    out
}

struct SentencePiece {
    /// Sentence text including its terminal punctuation run.
    body: String,
    /// Whitespace separating this sentence from the next.
    sep: String,
}

/// Splits on `. ! ?` runs followed by whitespace (or end of text).
fn split_sentences(text: &str) -> (String, Vec<SentencePiece>) {
    let lead_len = text.len() - text.trim_start().len();
    let lead = text[..lead_len].to_string();
    let rest = &text[lead_len..];
    let chars: Vec<char> = rest.chars().collect();
    let mut sentences = Vec::new();
    let mut body = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        body.push(c);
        let is_terminal = matches!(c, '.' | '!' | '?');
        let run_ends = i + 1 >= chars.len() || !matches!(chars[i + 1], '.' | '!' | '?');
        let followed_by_ws = i + 1 >= chars.len() || chars[i + 1].is_whitespace();
        if is_terminal && run_ends && followed_by_ws {
            let mut sep = String::new();
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_whitespace() {
                sep.push(chars[j]);
                j += 1;
            }
            sentences.push(SentencePiece {
                body: std::mem::take(&mut body),
                sep,
            });
            i = j;
        } else {
            i += 1;
        }
    }
    if !body.is_empty() {
        sentences.push(SentencePiece {
            body,
            sep: String::new(),
        });
    }
    (lead, sentences)
}

fn join_sentences(lead: &str, sentences: &[SentencePiece]) -> String {
    let mut out = String::from(lead);
    for piece in sentences {
        out.push_str(&piece.body);
        out.push_str(&piece.sep);
    }
    out
}
