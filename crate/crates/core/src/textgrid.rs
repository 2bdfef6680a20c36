//! Praat TextGrid parsing and ARPAbet phoneme normalization.
//!
//! Only the long ("ooTextFile") format is accepted, which is what the
//! Montreal Forced Aligner writes by default. Point tiers are parsed so that
//! files containing them load, but their points are discarded.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Labels dropped by [`phone_intervals`] unless the caller supplies its own set.
pub const DEFAULT_SILENCE_LABELS: [&str; 4] = ["", "sil", "sp", "spn"];

/// Default name of the phone tier in MFA output.
pub const DEFAULT_PHONE_TIER: &str = "phones";

const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextGridError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("short-format TextGrids are not supported; re-export in long (text) format")]
    ShortFormat,
    #[error("line {line}: unsupported tier class {class:?} (expected IntervalTier or TextTier)")]
    UnsupportedTierClass { line: usize, class: String },
    #[error("line {line}: tier {tier:?} declares {declared} intervals but {found} were found")]
    IntervalCountMismatch {
        line: usize,
        tier: String,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: tier {tier:?} has non-monotone boundaries: {detail}")]
    NonMonotone {
        line: usize,
        tier: String,
        detail: String,
    },
    #[error("tier not found: {name:?} (available: {available:?})")]
    TierNotFound { name: String, available: Vec<String> },
    #[error("tier {0:?} is a point tier, not an interval tier")]
    NotIntervalTier(String),
    #[error("unknown phoneme {0:?}")]
    UnknownPhoneme(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, TextGridError>;

/// One labelled time span of an interval tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub xmin: f64,
    pub xmax: f64,
    pub label: String,
}

impl Interval {
    pub fn new(xmin: f64, xmax: f64, label: impl Into<String>) -> Self {
        Self {
            xmin,
            xmax,
            label: label.into(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.xmax - self.xmin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TierKind {
    Interval,
    Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tier {
    pub name: String,
    pub kind: TierKind,
    pub xmin: f64,
    pub xmax: f64,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub tiers: Vec<Tier>,
}

impl TextGrid {
    pub fn tier(&self, name: &str) -> Option<&Tier> {
        self.tiers.iter().find(|t| t.name == name)
    }

    pub fn tier_names(&self) -> Vec<String> {
        self.tiers.iter().map(|t| t.name.clone()).collect()
    }

    /// Serializes back to long format. Numbers use the shortest decimal form
    /// that round-trips, so `parse(serialize(tg)) == tg`.
    pub fn to_long_format(&self) -> String {
        let mut out = String::new();
        out.push_str("File type = \"ooTextFile\"\n");
        out.push_str("Object class = \"TextGrid\"\n\n");
        out.push_str(&format!("xmin = {} \n", self.xmin));
        out.push_str(&format!("xmax = {} \n", self.xmax));
        out.push_str("tiers? <exists> \n");
        out.push_str(&format!("size = {} \n", self.tiers.len()));
        out.push_str("item []: \n");
        for (i, tier) in self.tiers.iter().enumerate() {
            out.push_str(&format!("    item [{}]:\n", i + 1));
            let class = match tier.kind {
                TierKind::Interval => "IntervalTier",
                TierKind::Point => "TextTier",
            };
            out.push_str(&format!("        class = \"{class}\" \n"));
            out.push_str(&format!("        name = {} \n", quote(&tier.name)));
            out.push_str(&format!("        xmin = {} \n", tier.xmin));
            out.push_str(&format!("        xmax = {} \n", tier.xmax));
            match tier.kind {
                TierKind::Interval => {
                    out.push_str(&format!(
                        "        intervals: size = {} \n",
                        tier.intervals.len()
                    ));
                    for (j, iv) in tier.intervals.iter().enumerate() {
                        out.push_str(&format!("        intervals [{}]:\n", j + 1));
                        out.push_str(&format!("            xmin = {} \n", iv.xmin));
                        out.push_str(&format!("            xmax = {} \n", iv.xmax));
                        out.push_str(&format!("            text = {} \n", quote(&iv.label)));
                    }
                }
                TierKind::Point => out.push_str("        points: size = 0 \n"),
            }
        }
        out
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Reads and parses a TextGrid file from disk.
pub fn read_textgrid(path: &Path) -> Result<TextGrid> {
    let bytes = fs::read(path).map_err(|e| TextGridError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let text = String::from_utf8(bytes).map_err(|e| TextGridError::Io {
        path: path.display().to_string(),
        message: format!("not valid UTF-8: {e}"),
    })?;
    parse_textgrid(&text)
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn new(document: &'a str) -> Self {
        let document = document.strip_prefix('\u{feff}').unwrap_or(document);
        let lines: Vec<(usize, &str)> = document
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let last_line = document.lines().count().max(1);
        Self {
            lines,
            pos: 0,
            last_line,
        }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self, expecting: &str) -> Result<(usize, &'a str)> {
        match self.lines.get(self.pos) {
            Some(&item) => {
                self.pos += 1;
                Ok(item)
            }
            None => Err(TextGridError::Parse {
                line: self.last_line,
                message: format!("unexpected end of document, expected {expecting}"),
            }),
        }
    }

    fn expect_exact(&mut self, text: &str) -> Result<usize> {
        let (line, got) = self.next(text)?;
        if got == text {
            Ok(line)
        } else {
            Err(parse_err(line, format!("expected `{text}`, found `{got}`")))
        }
    }

    fn expect_value(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (line, got) = self.next(key)?;
        match got.split_once('=') {
            Some((k, v)) if k.trim() == key => Ok((line, v.trim())),
            _ => Err(parse_err(line, format!("expected `{key} = ...`, found `{got}`"))),
        }
    }

    fn expect_number(&mut self, key: &str) -> Result<(usize, f64)> {
        let (line, raw) = self.expect_value(key)?;
        let value = f64::from_str(raw)
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(line, format!("`{key}` is not a finite number: `{raw}`")))?;
        Ok((line, value))
    }

    fn expect_count(&mut self, key: &str) -> Result<(usize, usize)> {
        let (line, raw) = self.expect_value(key)?;
        let value = raw
            .parse::<usize>()
            .map_err(|_| parse_err(line, format!("`{key}` is not a count: `{raw}`")))?;
        Ok((line, value))
    }

    fn expect_string(&mut self, key: &str) -> Result<(usize, String)> {
        let (line, raw) = self.expect_value(key)?;
        Ok((line, unquote(raw).ok_or_else(|| parse_err(line, format!("`{key}` is not a quoted string")))?))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> TextGridError {
    TextGridError::Parse {
        line,
        message: message.into(),
    }
}

fn unquote(raw: &str) -> Option<String> {
    let inner = raw.strip_prefix('"')?.strip_suffix('"')?;
    Some(inner.replace("\"\"", "\""))
}

/// Matches `<word> [<n>]:` and returns `n` (None for `item []:`).
fn indexed_header(line: &str, word: &str) -> Option<Option<usize>> {
    let rest = line.strip_prefix(word)?.trim_start();
    let rest = rest.strip_prefix('[')?;
    let (idx, tail) = rest.split_once(']')?;
    if tail.trim() != ":" {
        return None;
    }
    let idx = idx.trim();
    if idx.is_empty() {
        Some(None)
    } else {
        idx.parse().ok().map(Some)
    }
}

/// Parses a long-format TextGrid document.
///
/// Tolerates a UTF-8 byte-order mark and CRLF line endings. Interval tiers
/// must be sorted and non-overlapping; violations are rejected, not repaired.
pub fn parse_textgrid(document: &str) -> Result<TextGrid> {
    let mut cur = Cursor::new(document);

    let (line, header) = cur.next("File type")?;
    if header != "File type = \"ooTextFile\"" {
        if header.contains("ooTextFile short") {
            return Err(TextGridError::ShortFormat);
        }
        return Err(parse_err(line, format!("malformed header: `{header}`")));
    }
    let (line, class) = cur.next("Object class")?;
    if class != "Object class = \"TextGrid\"" {
        return Err(parse_err(line, format!("malformed header: `{class}`")));
    }
    // Short format has bare numbers where long format has `xmin = ...`.
    if let Some((_, next)) = cur.peek() {
        if !next.contains('=') && next.parse::<f64>().is_ok() {
            return Err(TextGridError::ShortFormat);
        }
    }

    let (_, xmin) = cur.expect_number("xmin")?;
    let (line, xmax) = cur.expect_number("xmax")?;
    if xmin < 0.0 || xmax <= xmin {
        return Err(parse_err(line, format!("invalid grid span [{xmin}, {xmax}]")));
    }
    cur.expect_exact("tiers? <exists>")?;
    let (size_line, n_tiers) = cur.expect_count("size")?;
    let (line, items) = cur.next("item []:")?;
    if indexed_header(items, "item") != Some(None) {
        return Err(parse_err(line, format!("expected `item []:`, found `{items}`")));
    }

    let mut tiers = Vec::with_capacity(n_tiers);
    for k in 1..=n_tiers {
        let (line, head) = cur.next("tier header")?;
        if indexed_header(head, "item") != Some(Some(k)) {
            return Err(parse_err(
                line,
                format!("expected `item [{k}]:` (declared {n_tiers} tiers), found `{head}`"),
            ));
        }
        tiers.push(parse_tier(&mut cur, xmin, xmax)?);
    }
    if let Some((line, extra)) = cur.peek() {
        let message = if indexed_header(extra, "item").is_some() {
            format!("more tiers than the declared size = {n_tiers} (declared on line {size_line})")
        } else {
            format!("unexpected trailing content `{extra}`")
        };
        return Err(parse_err(line, message));
    }

    Ok(TextGrid { xmin, xmax, tiers })
}

fn parse_tier(cur: &mut Cursor<'_>, grid_min: f64, grid_max: f64) -> Result<Tier> {
    let (class_line, class) = cur.expect_string("class")?;
    let kind = match class.as_str() {
        "IntervalTier" => TierKind::Interval,
        "TextTier" => TierKind::Point,
        _ => {
            return Err(TextGridError::UnsupportedTierClass {
                line: class_line,
                class,
            })
        }
    };
    let (_, name) = cur.expect_string("name")?;
    let (_, xmin) = cur.expect_number("xmin")?;
    let (line, xmax) = cur.expect_number("xmax")?;
    if xmin < grid_min - BOUNDARY_EPS || xmax > grid_max + BOUNDARY_EPS || xmax < xmin {
        return Err(parse_err(
            line,
            format!("tier {name:?} span [{xmin}, {xmax}] lies outside the grid [{grid_min}, {grid_max}]"),
        ));
    }

    let mut tier = Tier {
        name,
        kind,
        xmin,
        xmax,
        intervals: Vec::new(),
    };
    match kind {
        TierKind::Interval => parse_intervals(cur, &mut tier)?,
        TierKind::Point => skip_points(cur, &tier.name)?,
    }
    Ok(tier)
}

fn parse_intervals(cur: &mut Cursor<'_>, tier: &mut Tier) -> Result<()> {
    let (_, declared) = cur.expect_count("intervals: size")?;
    tier.intervals.reserve(declared);
    for k in 1..=declared {
        let mismatch = |line: usize| TextGridError::IntervalCountMismatch {
            line,
            tier: tier.name.clone(),
            declared,
            found: k - 1,
        };
        let (line, head) = match cur.peek() {
            Some(item) => item,
            None => return Err(mismatch(cur.last_line)),
        };
        if indexed_header(head, "intervals") != Some(Some(k)) {
            return Err(mismatch(line));
        }
        cur.pos += 1;
        let (_, xmin) = cur.expect_number("xmin")?;
        let (_, xmax) = cur.expect_number("xmax")?;
        let (text_line, label) = cur.expect_string("text")?;

        if xmin < 0.0 || xmax <= xmin {
            return Err(TextGridError::NonMonotone {
                line: text_line,
                tier: tier.name.clone(),
                detail: format!("interval {k} has span [{xmin}, {xmax}]"),
            });
        }
        if xmin < tier.xmin - BOUNDARY_EPS || xmax > tier.xmax + BOUNDARY_EPS {
            return Err(TextGridError::NonMonotone {
                line: text_line,
                tier: tier.name.clone(),
                detail: format!(
                    "interval {k} [{xmin}, {xmax}] exceeds tier span [{}, {}]",
                    tier.xmin, tier.xmax
                ),
            });
        }
        if let Some(prev) = tier.intervals.last() {
            if xmin < prev.xmax - BOUNDARY_EPS {
                return Err(TextGridError::NonMonotone {
                    line: text_line,
                    tier: tier.name.clone(),
                    detail: format!(
                        "interval {k} starts at {xmin} before interval {} ends at {}",
                        k - 1,
                        prev.xmax
                    ),
                });
            }
        }
        tier.intervals.push(Interval { xmin, xmax, label });
    }
    if let Some((line, next)) = cur.peek() {
        if indexed_header(next, "intervals").is_some() {
            let mut found = declared;
            let mut i = cur.pos;
            while let Some(&(_, l)) = cur.lines.get(i) {
                if indexed_header(l, "intervals").is_some() {
                    found += 1;
                } else if indexed_header(l, "item").is_some() {
                    break;
                }
                i += 1;
            }
            return Err(TextGridError::IntervalCountMismatch {
                line,
                tier: tier.name.clone(),
                declared,
                found,
            });
        }
    }
    Ok(())
}

fn skip_points(cur: &mut Cursor<'_>, tier: &str) -> Result<()> {
    let (_, declared) = cur.expect_count("points: size")?;
    for k in 1..=declared {
        let (line, head) = cur.next("points header")?;
        if indexed_header(head, "points") != Some(Some(k)) {
            return Err(parse_err(
                line,
                format!("tier {tier:?}: expected `points [{k}]:`, found `{head}`"),
            ));
        }
        let (line, key) = cur.next("time")?;
        if !(key.starts_with("number") || key.starts_with("time")) {
            return Err(parse_err(line, format!("expected point time, found `{key}`")));
        }
        cur.expect_string("mark")?;
    }
    Ok(())
}

/// Returns the named interval tier with silence and filler labels removed.
///
/// Matching against `silence` is case-insensitive and ignores surrounding
/// whitespace. An all-silence tier yields an empty list.
pub fn phone_intervals(tg: &TextGrid, tier_name: &str, silence: &[&str]) -> Result<Vec<Interval>> {
    let tier = tg.tier(tier_name).ok_or_else(|| TextGridError::TierNotFound {
        name: tier_name.to_string(),
        available: tg.tier_names(),
    })?;
    if tier.kind != TierKind::Interval {
        return Err(TextGridError::NotIntervalTier(tier_name.to_string()));
    }
    Ok(tier
        .intervals
        .iter()
        .filter(|iv| {
            let label = iv.label.trim();
            !silence.iter().any(|s| s.eq_ignore_ascii_case(label))
        })
        .cloned()
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Vowel,
    Consonant,
}

impl Category {
    pub const ALL: [Category; 2] = [Category::Vowel, Category::Consonant];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Vowel => "vowel",
            Category::Consonant => "consonant",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

macro_rules! phonemes {
    ($($name:ident => $cat:ident),* $(,)?) => {
        /// The 39 stress-free ARPAbet phones. Variant order is alphabetical,
        /// so the derived `Ord` is the ARPAbet tie-break order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Phoneme {
            $($name),*
        }

        impl Phoneme {
            pub const ALL: [Phoneme; 39] = [$(Phoneme::$name),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Phoneme::$name => stringify!($name)),*
                }
            }

            pub fn category(self) -> Category {
                match self {
                    $(Phoneme::$name => Category::$cat),*
                }
            }

            fn from_symbol(s: &str) -> Option<Phoneme> {
                match s {
                    $(stringify!($name) => Some(Phoneme::$name),)*
                    _ => None,
                }
            }
        }
    };
}

phonemes! {
    AA => Vowel, AE => Vowel, AH => Vowel, AO => Vowel, AW => Vowel, AY => Vowel,
    B => Consonant, CH => Consonant, D => Consonant, DH => Consonant,
    EH => Vowel, ER => Vowel, EY => Vowel,
    F => Consonant, G => Consonant, HH => Consonant,
    IH => Vowel, IY => Vowel,
    JH => Consonant, K => Consonant, L => Consonant, M => Consonant, N => Consonant, NG => Consonant,
    OW => Vowel, OY => Vowel,
    P => Consonant, R => Consonant, S => Consonant, SH => Consonant, T => Consonant, TH => Consonant,
    UH => Vowel, UW => Vowel,
    V => Consonant, W => Consonant, Y => Consonant, Z => Consonant, ZH => Consonant,
}

impl Phoneme {
    /// Phonemes of one category, in alphabetical order.
    pub fn of_category(category: Category) -> impl Iterator<Item = Phoneme> {
        Self::ALL.into_iter().filter(move |p| p.category() == category)
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phoneme {
    type Err = TextGridError;

    fn from_str(s: &str) -> Result<Self> {
        Phoneme::from_symbol(s).ok_or_else(|| TextGridError::UnknownPhoneme(s.to_string()))
    }
}

/// Drops a trailing lexical-stress digit (0, 1 or 2) and validates the
/// result against the 39-phone inventory.
pub fn strip_stress(label: &str) -> Result<Phoneme> {
    let trimmed = label.trim();
    let upper = trimmed.to_ascii_uppercase();
    let base = upper
        .strip_suffix(['0', '1', '2'])
        .unwrap_or(upper.as_str());
    Phoneme::from_symbol(base).ok_or_else(|| TextGridError::UnknownPhoneme(label.to_string()))
}

pub fn classify_phoneme(phoneme: Phoneme) -> Category {
    phoneme.category()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) type TierSpec<'a> = (&'a str, &'a [(f64, f64, &'a str)]);

    pub(crate) fn fixture(tiers: &[TierSpec]) -> String {
        let grid = TextGrid {
            xmin: 0.0,
            xmax: 1.0,
            tiers: tiers
                .iter()
                .map(|(name, ivs)| Tier {
                    name: name.to_string(),
                    kind: TierKind::Interval,
                    xmin: 0.0,
                    xmax: 1.0,
                    intervals: ivs.iter().map(|&(a, b, l)| Interval::new(a, b, l)).collect(),
                })
                .collect(),
        };
        grid.to_long_format()
    }

    const MINIMAL: &str = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0.00
xmax = 0.35
tiers? <exists>
size = 1
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0.00
        xmax = 0.35
        intervals: size = 1
        intervals [1]:
            xmin = 0.00
            xmax = 0.35
            text = "AA1"
"#;

    #[test]
    fn parses_minimal_document() {
        let tg = parse_textgrid(MINIMAL).unwrap();
        assert_eq!(tg.tiers.len(), 1);
        assert_eq!(tg.tiers[0].intervals, vec![Interval::new(0.0, 0.35, "AA1")]);
    }

    #[test]
    fn tolerates_bom_and_crlf() {
        let doc = format!("\u{feff}{}", MINIMAL.replace('\n', "\r\n"));
        assert_eq!(parse_textgrid(&doc).unwrap(), parse_textgrid(MINIMAL).unwrap());
    }

    #[test]
    fn keeps_tier_order() {
        let doc = fixture(&[
            ("words", &[(0.0, 1.0, "hello")]),
            ("phones", &[(0.0, 0.5, "HH"), (0.5, 1.0, "AH0")]),
        ]);
        let tg = parse_textgrid(&doc).unwrap();
        assert_eq!(tg.tier_names(), vec!["words", "phones"]);
        assert_eq!(tg.tiers[1].intervals.len(), 2);
    }

    #[test]
    fn declared_count_exceeding_present_names_tier() {
        let doc = MINIMAL.replace("intervals: size = 1", "intervals: size = 2");
        match parse_textgrid(&doc) {
            Err(TextGridError::IntervalCountMismatch {
                tier,
                declared,
                found,
                ..
            }) => {
                assert_eq!(tier, "phones");
                assert_eq!((declared, found), (2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn declared_count_below_present_is_rejected() {
        let doc = fixture(&[("phones", &[(0.0, 0.5, "HH"), (0.5, 1.0, "AH0")])])
            .replace("intervals: size = 2", "intervals: size = 1");
        assert!(matches!(
            parse_textgrid(&doc),
            Err(TextGridError::IntervalCountMismatch { declared: 1, found: 2, .. })
        ));
    }

    #[test]
    fn rejects_overlapping_intervals() {
        let doc = fixture(&[("phones", &[(0.0, 0.6, "HH"), (0.5, 1.0, "AH0")])]);
        let err = parse_textgrid(&doc).unwrap_err();
        assert!(matches!(err, TextGridError::NonMonotone { .. }), "{err}");
    }

    #[test]
    fn rejects_unknown_tier_class_with_line() {
        let doc = MINIMAL.replace("IntervalTier", "FancyTier");
        assert_eq!(
            parse_textgrid(&doc).unwrap_err(),
            TextGridError::UnsupportedTierClass {
                line: 10,
                class: "FancyTier".into()
            }
        );
    }

    #[test]
    fn rejects_short_format() {
        let doc = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n0.35\n<exists>\n1\n";
        assert_eq!(parse_textgrid(doc).unwrap_err(), TextGridError::ShortFormat);
    }

    #[test]
    fn malformed_header_reports_line() {
        let doc = MINIMAL.replace("ooTextFile", "binary");
        assert!(matches!(parse_textgrid(&doc), Err(TextGridError::Parse { line: 1, .. })));
    }

    #[test]
    fn point_tiers_parse_without_intervals() {
        let doc = r#"File type = "ooTextFile"
Object class = "TextGrid"
xmin = 0
xmax = 1
tiers? <exists>
size = 1
item []:
    item [1]:
        class = "TextTier"
        name = "events"
        xmin = 0
        xmax = 1
        points: size = 1
        points [1]:
            number = 0.5
            mark = "click"
"#;
        let tg = parse_textgrid(doc).unwrap();
        assert_eq!(tg.tiers[0].kind, TierKind::Point);
        assert!(tg.tiers[0].intervals.is_empty());
    }

    #[test]
    fn quoted_labels_round_trip() {
        let doc = fixture(&[("words", &[(0.0, 1.0, "say \"hi\"")])]);
        let tg = parse_textgrid(&doc).unwrap();
        assert_eq!(tg.tiers[0].intervals[0].label, "say \"hi\"");
        assert_eq!(parse_textgrid(&tg.to_long_format()).unwrap(), tg);
    }

    #[test]
    fn phone_intervals_drop_silence() {
        let doc = fixture(&[("phones", &[(0.0, 0.1, ""), (0.1, 0.3, "AA1"), (0.3, 0.4, "sp")])]);
        let tg = parse_textgrid(&doc).unwrap();
        let phones = phone_intervals(&tg, "phones", &DEFAULT_SILENCE_LABELS).unwrap();
        assert_eq!(phones, vec![Interval::new(0.1, 0.3, "AA1")]);
    }

    #[test]
    fn silence_matching_is_case_insensitive() {
        let doc = fixture(&[("phones", &[(0.0, 0.1, "SIL"), (0.1, 0.3, "SPN")])]);
        let tg = parse_textgrid(&doc).unwrap();
        assert!(phone_intervals(&tg, "phones", &DEFAULT_SILENCE_LABELS).unwrap().is_empty());
    }

    #[test]
    fn missing_tier_lists_available() {
        let doc = fixture(&[("words", &[(0.0, 1.0, "x")])]);
        let tg = parse_textgrid(&doc).unwrap();
        let err = phone_intervals(&tg, "phones", &DEFAULT_SILENCE_LABELS).unwrap_err();
        assert_eq!(
            err,
            TextGridError::TierNotFound {
                name: "phones".into(),
                available: vec!["words".into()]
            }
        );
        assert!(err.to_string().contains("tier not found"));
    }

    #[test]
    fn strip_stress_examples() {
        assert_eq!(strip_stress("AA1").unwrap(), Phoneme::AA);
        assert_eq!(strip_stress("AA0").unwrap(), Phoneme::AA);
        assert_eq!(strip_stress("AA2").unwrap(), Phoneme::AA);
        assert_eq!(strip_stress("ZH").unwrap().category(), Category::Consonant);
        assert_eq!(
            strip_stress("XX1").unwrap_err(),
            TextGridError::UnknownPhoneme("XX1".into())
        );
        assert!(strip_stress("AA3").is_err());
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_phoneme(Phoneme::OY), Category::Vowel);
        assert_eq!(classify_phoneme(Phoneme::T), Category::Consonant);
        assert_eq!(classify_phoneme(Phoneme::ER), Category::Vowel);
    }

    #[test]
    fn inventory_partitions_into_15_and_24() {
        assert_eq!(Phoneme::of_category(Category::Vowel).count(), 15);
        assert_eq!(Phoneme::of_category(Category::Consonant).count(), 24);
        let mut sorted = Phoneme::ALL.to_vec();
        sorted.sort_by_key(|p| p.as_str());
        assert_eq!(sorted, Phoneme::ALL.to_vec());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn strip_stress_idempotent(idx in 0usize..39, digit in prop::option::of(0u8..3)) {
                let p = Phoneme::ALL[idx];
                let raw = match digit {
                    Some(d) => format!("{}{d}", p.as_str()),
                    None => p.as_str().to_string(),
                };
                let once = strip_stress(&raw).unwrap();
                prop_assert_eq!(once, p);
                prop_assert_eq!(strip_stress(once.as_str()).unwrap(), once);
            }

            #[test]
            fn serialize_parse_fixed_point(
                cuts in prop::collection::btree_set(1u32..9999, 0..12),
                labels in prop::collection::vec("[A-Z]{1,2}[0-2]?|sp|", 13),
            ) {
                let mut bounds = vec![0.0];
                bounds.extend(cuts.iter().map(|&c| c as f64 / 10000.0 * 2.5));
                bounds.push(2.5);
                let intervals: Vec<Interval> = bounds
                    .windows(2)
                    .zip(labels.iter())
                    .map(|(w, l)| Interval::new(w[0], w[1], l.clone()))
                    .collect();
                let tg = TextGrid {
                    xmin: 0.0,
                    xmax: 2.5,
                    tiers: vec![Tier { name: "phones".into(), kind: TierKind::Interval, xmin: 0.0, xmax: 2.5, intervals }],
                };
                let parsed = parse_textgrid(&tg.to_long_format()).unwrap();
                prop_assert_eq!(&parsed, &tg);
                prop_assert_eq!(parsed.to_long_format(), tg.to_long_format());
            }
        }
    }
}
