//! Advice-on-tape model.
//!
//! The oracle writes one self-delimiting blob `e(s) = u(s) ∘ b(s) ∘ s` at the start
//! of the tape, where `b(s)` is the binary length of `s` and `u(s)` is `|b(s)|`
//! ones followed by a zero. The blob itself is a run of fixed-width big-endian
//! count fields of width `max(1, ⌈log₂(n+1)⌉)`. Strategies read it completely
//! before serving the first request.

use std::fmt;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Vec2;
use crate::restricted::{classify, GroupTag, RestrictedParams};
use crate::scaled::{box_of, is_short, BoxCounts, ScaledParams};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("bit string contains `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::from_bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn append(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    /// Appends `value` as exactly `width` big-endian bits.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        for shift in (0..width).rev() {
            self.bits.push(shift < 64 && (value >> shift) & 1 == 1);
        }
    }

    /// Packs into bytes, most significant bit first, zero-padded at the end.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
            })
            .collect()
    }

    pub fn from_bytes(data: &[u8], bits: usize) -> Result<Self> {
        if bits > data.len() * 8 {
            return Err(Error::MalformedTape(format!(
                "header claims {bits} bits but only {} bytes present",
                data.len()
            )));
        }
        Ok(BitString::from_bits(
            (0..bits)
                .map(|i| (data[i / 8] >> (7 - i % 8)) & 1 == 1)
                .collect(),
        ))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Number of bits needed to write `n` in binary, at least one.
pub fn bit_width(n: u64) -> usize {
    ((64 - n.leading_zeros()) as usize).max(1)
}

/// `b(s)`: the binary length of `s`; the empty string gets `"0"`.
pub fn length_field(len: usize) -> BitString {
    let mut out = BitString::new();
    out.push_uint(len as u64, bit_width(len as u64));
    out
}

pub fn encode_self_delimiting(s: &BitString) -> BitString {
    let b = length_field(s.len());
    let mut out = BitString::new();
    for _ in 0..b.len() {
        out.push(true);
    }
    out.push(false);
    out.append(&b);
    out.append(s);
    out
}

/// Inverse of [`encode_self_delimiting`] starting at `cursor`; returns the payload
/// and the cursor just past it.
pub fn decode_self_delimiting(tape: &BitString, cursor: usize) -> Result<(BitString, usize)> {
    let bits = tape.bits();
    let mut pos = cursor;
    let mut width = 0usize;
    loop {
        match bits.get(pos) {
            Some(true) => width += 1,
            Some(false) => break,
            None => {
                return Err(Error::MalformedTape(
                    "tape ended inside the unary prefix".into(),
                ))
            }
        }
        pos += 1;
    }
    pos += 1;
    if width == 0 || width > 63 {
        return Err(Error::MalformedTape(format!("length field width {width}")));
    }
    let field = bits
        .get(pos..pos + width)
        .ok_or_else(|| Error::MalformedTape("tape ended inside the length field".into()))?;
    let len = field.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    pos += width;
    let payload = bits
        .get(pos..pos + len)
        .ok_or_else(|| Error::MalformedTape(format!("tape ended inside a {len}-bit payload")))?;
    Ok((BitString::from_bits(payload.to_vec()), pos + len))
}

/// Width of one count field for a sequence of length `n`: `max(1, ⌈log₂(n+1)⌉)`.
pub fn count_width(n: u64) -> usize {
    bit_width(n)
}

/// Concatenates `counts` as fixed-width fields. Each count must be at most `n`.
pub fn encode_counts(counts: &[u64], n: u64) -> Result<BitString> {
    let width = count_width(n);
    let mut out = BitString::new();
    for &c in counts {
        if c > n {
            return Err(Error::CountTooLarge { count: c, n });
        }
        out.push_uint(c, width);
    }
    Ok(out)
}

/// Splits a count blob into `fields` equal-width values; the width is implied by the length.
pub fn decode_counts(blob: &BitString, fields: usize) -> Result<Vec<u64>> {
    if fields == 0 {
        return if blob.is_empty() {
            Ok(Vec::new())
        } else {
            Err(Error::MalformedTape(
                "payload for zero fields is not empty".into(),
            ))
        };
    }
    if !blob.len().is_multiple_of(fields) || blob.is_empty() {
        return Err(Error::MalformedTape(format!(
            "{} bits cannot be split into {fields} fields",
            blob.len()
        )));
    }
    let width = blob.len() / fields;
    if width > 64 {
        return Err(Error::MalformedTape(format!(
            "field width {width} exceeds 64"
        )));
    }
    Ok(blob
        .bits()
        .chunks(width)
        .map(|chunk| chunk.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
        .collect())
}

/// Sequential reader over an advice tape that tracks how many bits were consumed.
#[derive(Debug)]
pub struct TapeReader<'a> {
    tape: &'a BitString,
    cursor: usize,
}

impl<'a> TapeReader<'a> {
    pub fn new(tape: &'a BitString) -> Self {
        TapeReader { tape, cursor: 0 }
    }

    pub fn read_self_delimited(&mut self) -> Result<BitString> {
        let (s, next) = decode_self_delimiting(self.tape, self.cursor)?;
        self.cursor = next;
        Ok(s)
    }

    pub fn bits_read(&self) -> usize {
        self.cursor
    }
}

/// Count vectors the oracle hands to a strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PayloadCounts {
    /// Per-strip counts `L_1..L_k`, `M_1..M_k`, `S_1..S_k`.
    Restricted {
        large: Vec<u64>,
        medium: Vec<u64>,
        small: Vec<u64>,
    },
    /// Long-vector counts per box.
    Scaled { k: u32, counts: BoxCounts },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdvicePayload {
    /// Sequence length; fixes the field width.
    pub n: u64,
    pub counts: PayloadCounts,
}

impl AdvicePayload {
    /// Field values in tape order. Scaled payloads are dense and row-major over `(i, j)`.
    pub fn fields(&self) -> Vec<u64> {
        match &self.counts {
            PayloadCounts::Restricted {
                large,
                medium,
                small,
            } => large.iter().chain(medium).chain(small).copied().collect(),
            PayloadCounts::Scaled { k, counts } => counts.to_dense(*k),
        }
    }

    pub fn total(&self) -> u64 {
        self.fields().iter().sum()
    }

    pub fn to_blob(&self) -> Result<BitString> {
        encode_counts(&self.fields(), self.n)
    }

    /// The whole advice tape: the count blob, self-delimited.
    pub fn to_tape(&self) -> Result<BitString> {
        Ok(encode_self_delimiting(&self.to_blob()?))
    }
}

/// Reads `3k` strip counts from the tape.
pub fn read_restricted_counts(
    reader: &mut TapeReader<'_>,
    k: u32,
) -> Result<(Vec<u64>, Vec<u64>, Vec<u64>)> {
    let k = k as usize;
    let values = decode_counts(&reader.read_self_delimited()?, 3 * k)?;
    Ok((
        values[..k].to_vec(),
        values[k..2 * k].to_vec(),
        values[2 * k..].to_vec(),
    ))
}

/// Reads `k²` box counts from the tape.
pub fn read_scaled_counts(reader: &mut TapeReader<'_>, k: u32) -> Result<BoxCounts> {
    let values = decode_counts(&reader.read_self_delimited()?, (k as usize) * (k as usize))?;
    Ok(BoxCounts::from_dense(k, &values))
}

/// Per-strip counts of large, medium and small vectors. Tiny and huge vectors are not counted.
pub fn oracle_restricted(sigma: &[Vec2], params: &RestrictedParams) -> Result<AdvicePayload> {
    let k = params.k() as usize;
    let (mut large, mut medium, mut small) = (vec![0u64; k], vec![0u64; k], vec![0u64; k]);
    for v in sigma {
        let g = classify(v, params)?;
        let slot = match g.tag {
            GroupTag::Large => &mut large,
            GroupTag::Medium => &mut medium,
            GroupTag::Small => &mut small,
            GroupTag::Tiny | GroupTag::Huge => continue,
        };
        slot[g.strip.expect("strip for counted groups") as usize - 1] += 1;
    }
    Ok(AdvicePayload {
        n: sigma.len() as u64,
        counts: PayloadCounts::Restricted {
            large,
            medium,
            small,
        },
    })
}

/// Number of long vectors in each box; short vectors are not reported.
pub fn oracle_scaled(sigma: &[Vec2], params: &ScaledParams) -> AdvicePayload {
    let k = params.k();
    let mut counts = BoxCounts::default();
    for v in sigma.iter().filter(|v| !is_short(v, k)) {
        counts.add(box_of(v, k), 1);
    }
    AdvicePayload {
        n: sigma.len() as u64,
        counts: PayloadCounts::Scaled { k, counts },
    }
}

#[derive(Serialize, Deserialize)]
struct TapeFile {
    bits: usize,
    data: String,
}

/// `{"bits": n, "data": base64}` with bits packed most significant first.
pub fn tape_to_json(tape: &BitString) -> Result<String> {
    Ok(serde_json::to_string(&TapeFile {
        bits: tape.len(),
        data: STANDARD.encode(tape.to_bytes()),
    })?)
}

pub fn tape_from_json(text: &str) -> Result<BitString> {
    let file: TapeFile = serde_json::from_str(text)?;
    let data = STANDARD
        .decode(file.data.as_bytes())
        .map_err(|e| Error::MalformedTape(format!("base64: {e}")))?;
    BitString::from_bytes(&data, file.bits)
}
