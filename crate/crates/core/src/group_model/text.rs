//! Text formats: element words, edge labels and model specification files.
//!
//! Generators are named by lowercase letters. In a free product the finite
//! factors take the first names (`a`, `b`, ...) and free generators follow.
//! An uppercase name is the inverse. Words accept `^n`, `^-n`, `⁻¹` and
//! parentheses; `c[i]` names element `i` of a table factor.

use std::path::Path;

use super::{FiniteGroup, GroupElement, GroupModel, Letter, ModelKind, SubgroupElement};
use crate::error::{LabError, Result};

fn name_char(i: usize) -> char {
    (b'a' + i as u8) as char
}

struct Parser<'a, R, I> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
    resolve: R,
    invert: I,
}

impl<'a, R, I> Parser<'a, R, I>
where
    R: Fn(char, Option<u16>) -> Result<Letter>,
    I: Fn(&Letter) -> Letter,
{
    fn err(&self, msg: &str) -> LabError {
        LabError::Input(format!("cannot parse '{}' at {}: {msg}", self.src, self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace() || c == '·' || c == '*') {
            self.pos += 1;
        }
    }

    fn number(&mut self) -> Option<i64> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.chars[start..self.pos]
            .iter()
            .collect::<String>()
            .parse()
            .ok()
    }

    fn superscript(&mut self) -> Option<i64> {
        const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
        let start = self.pos;
        let neg = self.peek() == Some('⁻');
        if neg {
            self.pos += 1;
        }
        let mut v: i64 = 0;
        let mut any = false;
        while let Some(d) = self.peek().and_then(|c| DIGITS.iter().position(|&x| x == c)) {
            v = v * 10 + d as i64;
            any = true;
            self.pos += 1;
        }
        if !any {
            self.pos = start;
            return None;
        }
        Some(if neg { -v } else { v })
    }

    fn power(&self, word: Vec<Letter>, k: i64) -> Vec<Letter> {
        let block: Vec<Letter> = if k < 0 {
            word.iter().rev().map(|l| (self.invert)(l)).collect()
        } else {
            word
        };
        let mut out = Vec::new();
        for _ in 0..k.unsigned_abs() {
            out.extend_from_slice(&block);
        }
        out
    }

    fn expr(&mut self, closing: bool) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => {
                    if closing {
                        return Err(self.err("missing ')'"));
                    }
                    return Ok(out);
                }
                Some(')') => {
                    if closing {
                        self.pos += 1;
                        return Ok(out);
                    }
                    return Err(self.err("unbalanced ')'"));
                }
                Some(_) => {
                    let item = self.item()?;
                    out.extend(item);
                }
            }
        }
    }

    fn item(&mut self) -> Result<Vec<Letter>> {
        let mut word = match self.peek() {
            Some('(') => {
                self.pos += 1;
                self.expr(true)?
            }
            Some('1') => {
                self.pos += 1;
                Vec::new()
            }
            Some(c) if c.is_ascii_alphabetic() => {
                self.pos += 1;
                let mut index = None;
                if self.peek() == Some('[') {
                    self.pos += 1;
                    let n = self.number().ok_or_else(|| self.err("expected index"))?;
                    if self.peek() != Some(']') {
                        return Err(self.err("expected ']'"));
                    }
                    self.pos += 1;
                    index = Some(u16::try_from(n).map_err(|_| self.err("index too large"))?);
                }
                let l = (self.resolve)(c.to_ascii_lowercase(), index)?;
                if c.is_ascii_uppercase() {
                    vec![(self.invert)(&l)]
                } else {
                    vec![l]
                }
            }
            _ => return Err(self.err("unexpected character")),
        };
        loop {
            if self.peek() == Some('^') {
                self.pos += 1;
                let neg = matches!(self.peek(), Some('-') | Some('−'));
                if neg {
                    self.pos += 1;
                }
                let n = self.number().ok_or_else(|| self.err("expected exponent"))?;
                word = self.power(word, if neg { -n } else { n });
            } else if let Some(k) = self.superscript() {
                word = self.power(word, k);
            } else {
                return Ok(word);
            }
        }
    }
}

fn parse_raw<R, I>(src: &str, resolve: R, invert: I) -> Result<Vec<Letter>>
where
    R: Fn(char, Option<u16>) -> Result<Letter>,
    I: Fn(&Letter) -> Letter,
{
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
        src,
        resolve,
        invert,
    };
    p.expr(false)
}

impl GroupModel {
    fn resolve_name(&self, c: char, index: Option<u16>) -> Result<Letter> {
        let i = (c as u8 - b'a') as usize;
        let bad = || LabError::Input(format!("unknown generator '{c}'"));
        match &self.kind {
            ModelKind::FreeCyclic { rank, .. } => {
                if index.is_some() || i >= *rank as usize {
                    return Err(bad());
                }
                Ok(Letter::x(i as u8))
            }
            ModelKind::FreeProduct { factors, free_rank } => {
                if let Some(f) = factors.get(i) {
                    let idx = match index {
                        Some(k) => k,
                        None if f.cyclic => 1,
                        None => {
                            return Err(LabError::Input(format!(
                                "factor '{c}' is not cyclic; write {c}[i]"
                            )))
                        }
                    };
                    let l = Letter::factor(i as u8, idx);
                    self.check_letter(&l)?;
                    Ok(l)
                } else if i < factors.len() + *free_rank as usize && index.is_none() {
                    Ok(Letter::x((i - factors.len()) as u8))
                } else {
                    Err(bad())
                }
            }
        }
    }

    fn gen_name(&self, gen: u8) -> char {
        match &self.kind {
            ModelKind::FreeCyclic { .. } => name_char(gen as usize),
            ModelKind::FreeProduct { factors, .. } => name_char(factors.len() + gen as usize),
        }
    }

    /// Parses a word such as `aab`, `(ab)^4`, `b^-1a`, `B A` or `1`.
    pub fn parse_element(&self, src: &str) -> Result<GroupElement> {
        let raw = parse_raw(
            src,
            |c, i| self.resolve_name(c, i),
            |l| self.invert_letter(l),
        )?;
        self.normalize(&raw)
    }

    fn format_factor_element(&self, family: u8, i: u16) -> String {
        let f = &self.factors()[family as usize];
        let c = name_char(family as usize);
        if !f.cyclic {
            format!("{c}[{i}]")
        } else if i == 1 {
            c.to_string()
        } else {
            format!("{c}^{i}")
        }
    }

    /// Prints a normal form, compressing runs of equal X-letters.
    pub fn format_element(&self, g: &GroupElement) -> String {
        if g.is_identity() {
            return "1".to_string();
        }
        let mut out = String::new();
        let letters = g.letters();
        let mut i = 0;
        while i < letters.len() {
            match letters[i] {
                Letter::X { gen, inv } => {
                    let mut j = i;
                    while j < letters.len() && letters[j] == letters[i] {
                        j += 1;
                    }
                    let run = j - i;
                    out.push(self.gen_name(gen));
                    match (inv, run) {
                        (false, 1) => {}
                        (false, n) => out.push_str(&format!("^{n}")),
                        (true, n) => out.push_str(&format!("^-{n}")),
                    }
                    i = j;
                }
                Letter::H {
                    family,
                    elem: SubgroupElement::Finite(k),
                } => {
                    out.push_str(&self.format_factor_element(family, k));
                    i += 1;
                }
                Letter::H { .. } => unreachable!("normal forms carry no relator letters"),
            }
        }
        out
    }

    fn relator_text(&self) -> String {
        let w = GroupElement(self.relator().to_vec());
        let t = self.format_element(&w);
        if t.contains('^') {
            format!("({t})")
        } else {
            t
        }
    }

    /// Prints an edge label: `x:a`, `x:a^-1`, `h:ab^3` or `h:b^4`.
    pub fn format_letter(&self, l: &Letter) -> String {
        match *l {
            Letter::X { gen, inv } => {
                if inv {
                    format!("x:{}^-1", self.gen_name(gen))
                } else {
                    format!("x:{}", self.gen_name(gen))
                }
            }
            Letter::H {
                elem: SubgroupElement::Power(k),
                ..
            } => format!("h:{}^{k}", self.relator_text()),
            Letter::H {
                family,
                elem: SubgroupElement::Finite(i),
            } => format!("h:{}", self.format_factor_element(family, i)),
        }
    }

    pub fn format_labels(&self, labels: &[Letter]) -> Vec<String> {
        labels.iter().map(|l| self.format_letter(l)).collect()
    }

    /// Parses one edge label. Without an `x:`/`h:` prefix the text must be
    /// a single X-letter or an element of some `H_λ`.
    pub fn parse_letter(&self, src: &str) -> Result<Letter> {
        let s = src.trim();
        let lower = s.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("x:").map(|_| &s[2..]) {
            let g = self.parse_element(rest)?;
            return match g.letters() {
                [l @ Letter::X { .. }] => Ok(*l),
                _ => Err(LabError::Input(format!("'{src}' is not an X-letter"))),
            };
        }
        let body = lower.strip_prefix("h:").map(|_| &s[2..]).unwrap_or(s);
        if let ModelKind::FreeCyclic { .. } = self.kind {
            if let Some(pos) = body.rfind('^') {
                let (base, exp) = (&body[..pos], &body[pos + 1..]);
                let base_el = self.parse_element(base)?;
                let w = GroupElement(self.relator().to_vec());
                let sign = if base_el == w {
                    1
                } else if base_el == self.inv(&w) {
                    -1
                } else {
                    0
                };
                let exp = exp.replace('−', "-");
                if let (true, Ok(k)) = (sign != 0, exp.trim().parse::<i32>()) {
                    if k == 0 {
                        return Err(LabError::Input("relator power 0 is not a label".into()));
                    }
                    return Ok(Letter::power(sign * k));
                }
            }
        }
        let g = self.parse_element(body)?;
        if let [l @ Letter::X { .. }] = g.letters() {
            return Ok(*l);
        }
        match self.family_of(&g) {
            Some((family, elem)) => Ok(Letter::H { family, elem }),
            None => Err(LabError::Input(format!(
                "'{src}' is neither an X-letter nor a subgroup element"
            ))),
        }
    }

    /// Parses `[h:ab^3, x:a]` (brackets optional; empty list allowed).
    pub fn parse_letter_list(&self, src: &str) -> Result<Vec<Letter>> {
        let s = src.trim();
        let s = s.strip_prefix('[').unwrap_or(s);
        let s = s.strip_suffix(']').unwrap_or(s);
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| self.parse_letter(t))
            .collect()
    }

    /// One-line description, e.g. `free_cyclic rank=2 relator=ab`.
    pub fn describe(&self) -> String {
        match &self.kind {
            ModelKind::FreeCyclic { rank, .. } => {
                format!("free_cyclic rank={rank} relator={}", self.relator_text())
            }
            ModelKind::FreeProduct { factors, free_rank } => {
                let names: Vec<&str> = factors.iter().map(|f| f.name.as_str()).collect();
                format!("free_product factors={} free_rank={free_rank}", names.join(","))
            }
        }
    }
}

/// `F(a,b)` with `H = ⟨ab⟩`.
pub fn builtin_free_cyclic() -> GroupModel {
    GroupModel::free_cyclic(2, vec![Letter::x(0), Letter::x(1)]).expect("valid builtin")
}

/// `Z/3 * Z/5`.
pub fn builtin_free_product() -> GroupModel {
    GroupModel::free_product(
        vec![
            FiniteGroup::cyclic(3).expect("valid"),
            FiniteGroup::cyclic(5).expect("valid"),
        ],
        0,
    )
    .expect("valid builtin")
}

#[derive(Default)]
struct TableSection {
    rows: Vec<Vec<usize>>,
    file: Option<String>,
}

fn parse_csv_rows(text: &str, name: &str) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.trim().parse::<usize>().map_err(|_| {
                        LabError::Load(format!("table {name}: bad entry '{}'", v.trim()))
                    })
                })
                .collect()
        })
        .collect()
}

/// Loads a model specification.
///
/// ```text
/// [model] kind=free_product factors=Z3,S3 free_rank=0
/// [table S3]
/// 0,1,2,3,4,5
/// ...
/// ```
///
/// A table section may instead carry `file=path.csv`, resolved against
/// `base_dir`.
pub fn load_model_spec(text: &str, base_dir: Option<&Path>) -> Result<GroupModel> {
    let mut model_keys: Vec<(String, String)> = Vec::new();
    let mut tables: Vec<(String, TableSection)> = Vec::new();
    let mut section: Option<String> = None;
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut rest = line;
        if line.starts_with('[') {
            let end = line
                .find(']')
                .ok_or_else(|| LabError::Load(format!("bad section header '{line}'")))?;
            let header = line[1..end].trim();
            rest = line[end + 1..].trim();
            if header == "model" {
                section = Some("model".into());
            } else if let Some(name) = header.strip_prefix("table") {
                let name = name.trim().to_string();
                tables.push((name.clone(), TableSection::default()));
                section = Some(format!("table {name}"));
            } else {
                return Err(LabError::Load(format!("unknown section '{header}'")));
            }
            if rest.is_empty() {
                continue;
            }
        }
        match section.as_deref() {
            Some("model") => {
                for tok in rest.split_whitespace() {
                    let (k, v) = tok
                        .split_once('=')
                        .ok_or_else(|| LabError::Load(format!("expected key=value, got '{tok}'")))?;
                    model_keys.push((k.to_string(), v.to_string()));
                }
            }
            Some(_) => {
                let (name, t) = tables.last_mut().expect("section exists");
                if let Some(path) = rest.strip_prefix("file=") {
                    t.file = Some(path.trim().to_string());
                } else {
                    t.rows.extend(parse_csv_rows(rest, name)?);
                }
            }
            None => return Err(LabError::Load("content before any section".into())),
        }
    }
    let get = |k: &str| {
        model_keys
            .iter()
            .rev()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.as_str())
    };
    let parse_u8 = |k: &str, default: Option<u8>| -> Result<u8> {
        match get(k) {
            Some(v) => v
                .parse()
                .map_err(|_| LabError::Load(format!("bad value for {k}: '{v}'"))),
            None => default.ok_or_else(|| LabError::Load(format!("missing key {k}"))),
        }
    };
    match get("kind") {
        Some("free_cyclic") => {
            let rank = parse_u8("rank", None)?;
            let rel = get("relator").ok_or_else(|| LabError::Load("missing key relator".into()))?;
            let raw = parse_raw(
                rel,
                |c, i| {
                    let g = (c as u8 - b'a') as usize;
                    if i.is_some() || g >= rank as usize {
                        Err(LabError::Input(format!("unknown generator '{c}'")))
                    } else {
                        Ok(Letter::x(g as u8))
                    }
                },
                |l| match *l {
                    Letter::X { gen, inv } => Letter::X { gen, inv: !inv },
                    h => h,
                },
            )
            .map_err(|e| LabError::Load(e.to_string()))?;
            GroupModel::free_cyclic(rank, raw)
        }
        Some("free_product") => {
            let free_rank = parse_u8("free_rank", Some(0))?;
            let list = get("factors").ok_or_else(|| LabError::Load("missing key factors".into()))?;
            let mut factors = Vec::new();
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let cyclic_order = name
                    .strip_prefix('Z')
                    .and_then(|n| n.parse::<usize>().ok());
                if let Some(n) = cyclic_order {
                    factors.push(FiniteGroup::cyclic(n)?);
                    continue;
                }
                let (_, t) = tables
                    .iter()
                    .find(|(n, _)| n == name)
                    .ok_or_else(|| LabError::Load(format!("no table for factor '{name}'")))?;
                let rows = match &t.file {
                    Some(path) => {
                        let p = base_dir.map(|d| d.join(path)).unwrap_or_else(|| path.into());
                        let text = std::fs::read_to_string(&p).map_err(|e| {
                            LabError::Load(format!("cannot read {}: {e}", p.display()))
                        })?;
                        parse_csv_rows(&text, name)?
                    }
                    None => t.rows.clone(),
                };
                factors.push(FiniteGroup::from_table(name, rows)?);
            }
            GroupModel::free_product(factors, free_rank)
        }
        Some(other) => Err(LabError::Load(format!("unknown model kind '{other}'"))),
        None => Err(LabError::Load("missing key kind".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_words() {
        let m = builtin_free_cyclic();
        for s in ["1", "a", "a^2bab", "b^-1a^-1", "a^-3b^2a"] {
            let g = m.parse_element(s).unwrap();
            assert_eq!(m.format_element(&g), s);
        }
        assert_eq!(
            m.parse_element("(ab)^4").unwrap(),
            m.parse_element("abababab").unwrap()
        );
        assert_eq!(m.parse_element("b⁻¹a⁻¹").unwrap(), m.parse_element("BA").unwrap());
        assert_eq!(m.parse_element("(ab)²").unwrap(), m.parse_element("abab").unwrap());
    }

    #[test]
    fn free_product_words() {
        let m = builtin_free_product();
        let g = m.parse_element("ab^4a^2").unwrap();
        assert_eq!(m.format_element(&g), "ab^4a^2");
        assert_eq!(m.x_length(&g), 3);
        assert!(m.parse_element("c").is_err());
        assert!(m.parse_element("aaa").unwrap().is_identity());
    }

    #[test]
    fn labels_round_trip() {
        let m = builtin_free_cyclic();
        let labels = m.parse_letter_list("[h:ab^3, x:a, h:(ab)^-2, X:b^-1]").unwrap();
        assert_eq!(
            labels,
            vec![
                Letter::power(3),
                Letter::x(0),
                Letter::power(-2),
                Letter::x_inv(1)
            ]
        );
        for l in &labels {
            assert_eq!(m.parse_letter(&m.format_letter(l)).unwrap(), *l);
        }
        assert_eq!(m.parse_letter("H:(ab)³").unwrap(), Letter::power(3));
        assert!(m.parse_letter_list("[]").unwrap().is_empty());
        let p = builtin_free_product();
        assert_eq!(p.parse_letter("h:b^4").unwrap(), Letter::factor(1, 4));
        assert_eq!(p.parse_letter("a").unwrap(), Letter::factor(0, 1));
        assert!(p.parse_letter("ab").is_err());
    }

    #[test]
    fn model_spec_files() {
        let m = load_model_spec("[model] kind=free_cyclic rank=2 relator=ab", None).unwrap();
        assert_eq!(m.describe(), "free_cyclic rank=2 relator=ab");
        let p = load_model_spec("[model] kind=free_product factors=Z3,Z5 free_rank=0", None)
            .unwrap();
        assert_eq!(p.num_families(), 2);
        let s3 = "[model]\nkind=free_product factors=Z2,S3\n[table S3]\n\
                  0,1,2,3,4,5\n1,0,4,5,2,3\n2,5,0,4,3,1\n3,4,5,0,1,2\n4,3,1,2,5,0\n5,2,3,1,0,4\n";
        let m = load_model_spec(s3, None).unwrap();
        assert_eq!(m.factors()[1].order(), 6);
        let g = m.parse_element("b[1]b[1]").unwrap();
        assert!(g.is_identity());
    }

    #[test]
    fn corrupted_spec_is_a_load_error() {
        let bad = "[model] kind=free_product factors=T\n[table T]\n0,1\n1,1\n";
        assert!(matches!(load_model_spec(bad, None), Err(LabError::Load(_))));
        assert!(load_model_spec("[model] kind=free_cyclic rank=2 relator=abab", None).is_err());
        assert!(load_model_spec("[model] kind=tree", None).is_err());
    }
}
