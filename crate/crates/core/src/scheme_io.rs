//! Reading and writing schemes.
//!
//! Two formats:
//!
//! * an expression format, one definition per statement:
//!
//!   ```text
//!   m1 := (a11+a22)*(b11+b22);
//!   ...
//!   c11 := m1+m4+m5+m7;
//!   ```
//!
//!   Entries may be spelled `a11`, `a_11`, `a[1,1]` or `a_{1,1}` (the compact
//!   forms only for single-digit indices), products `m7`, `m_7`, `m[7]` or
//!   `m_{7}`. Statements end at `;` or at a newline, and may come in any
//!   order. `:=` and `=` both assign. `#` and `//` start comments. A literal
//!   `0` stands for an empty sum.
//!
//! * a canonical binary format: the magic `BMMS1`, then `n, m, p, rank` as
//!   little-endian `u32`, then for each product the alpha, beta and gamma
//!   masks, row-major, one little-endian `u64` per 64 columns of a row.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::error::ShapeError;
use crate::gf2::{words_per_row, BitMatrix};
use crate::scheme::{Product, Scheme, Side};

pub const CANONICAL_MAGIC: &[u8; 5] = b"BMMS1";
const HEADER_LEN: usize = 5 + 4 * 4;

/// 1-based line and column of a character in the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: unexpected character {found:?}")]
    Lex { pos: Pos, found: char },
    #[error("{pos}: bad index in '{text}': {reason}")]
    BadIndex { pos: Pos, text: String, reason: &'static str },
    #[error("{pos}: expected {expected}, found {found}")]
    Syntax { pos: Pos, expected: &'static str, found: String },
    #[error("{pos}: factor mixes a- and b-entries")]
    MixedFactor { pos: Pos },
    #[error("{pos}: first factor must use a-entries and second factor b-entries")]
    FactorOrder { pos: Pos },
    #[error("{pos}: m{k} is defined twice")]
    DuplicateProduct { pos: Pos, k: usize },
    #[error("{pos}: c{i},{j} is defined twice")]
    DuplicateEntry { pos: Pos, i: usize, j: usize },
    #[error("{pos}: m{k} is never defined")]
    UndefinedProduct { pos: Pos, k: usize },
    #[error("m{k} is missing; products must be numbered 1..={max} without gaps")]
    MissingProduct { k: usize, max: usize },
    #[error("c{i},{j} is never defined")]
    MissingEntry { i: usize, j: usize },
    #[error("no product definitions found")]
    Empty,
}

impl ParseError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            ParseError::Lex { pos, .. }
            | ParseError::BadIndex { pos, .. }
            | ParseError::Syntax { pos, .. }
            | ParseError::MixedFactor { pos }
            | ParseError::FactorOrder { pos }
            | ParseError::DuplicateProduct { pos, .. }
            | ParseError::DuplicateEntry { pos, .. }
            | ParseError::UndefinedProduct { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("bad magic, expected \"BMMS1\"")]
    BadMagic,
    #[error("truncated payload: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("{extra} trailing bytes after the last product")]
    TrailingBytes { extra: usize },
    #[error("dimensions must be positive, got {n}x{m}x{p}")]
    ZeroDimension { n: usize, m: usize, p: usize },
    #[error("product {index}: {source}")]
    Mask { index: usize, source: ShapeError },
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error("scheme text is not valid UTF-8")]
    Utf8,
}

// ---------------------------------------------------------------------------
// lexer

/// Which matrix an entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntryKind {
    A,
    B,
    C,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    /// Zero-based `(row, col)`.
    Entry(EntryKind, usize, usize),
    /// One-based product number.
    MRef(usize),
    Zero,
    Plus,
    Times,
    Assign,
    Separator,
    Newline,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Entry(kind, i, j) => {
                let c = match kind {
                    EntryKind::A => 'a',
                    EntryKind::B => 'b',
                    EntryKind::C => 'c',
                };
                write!(f, "'{c}[{},{}]'", i + 1, j + 1)
            }
            TokenKind::MRef(k) => write!(f, "'m{k}'"),
            TokenKind::Zero => f.write_str("'0'"),
            TokenKind::Plus => f.write_str("'+'"),
            TokenKind::Times => f.write_str("'*'"),
            TokenKind::Assign => f.write_str("':='"),
            TokenKind::Separator => f.write_str("';'"),
            TokenKind::Newline => f.write_str("end of line"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { chars: src.char_indices().peekable(), src, line: 1, line_start: 0 }
    }

    fn pos_of(&self, offset: usize) -> Pos {
        Pos { line: self.line, col: self.src[self.line_start..offset].chars().count() + 1 }
    }

    fn peek_char(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        self.chars.next()
    }

    fn take_digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek_char().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn skip_spaces(&mut self) {
        while self.peek_char().is_some_and(|c| c == ' ' || c == '\t' || c == '\r') {
            self.bump();
        }
    }

    fn expect_char(&mut self, want: char, pos: Pos, text: &str) -> Result<(), ParseError> {
        self.skip_spaces();
        match self.bump() {
            Some((_, c)) if c == want => Ok(()),
            _ => Err(ParseError::BadIndex { pos, text: text.to_string(), reason: "malformed bracketed index" }),
        }
    }

    fn number(&mut self, pos: Pos, text: &str) -> Result<usize, ParseError> {
        self.skip_spaces();
        let digits = self.take_digits();
        if digits.is_empty() {
            return Err(ParseError::BadIndex { pos, text: text.to_string(), reason: "index is not a number" });
        }
        match digits.parse::<usize>() {
            Ok(0) => Err(ParseError::BadIndex { pos, text: text.to_string(), reason: "indices start at 1" }),
            Ok(v) if v <= 1 << 16 => Ok(v),
            _ => Err(ParseError::BadIndex { pos, text: text.to_string(), reason: "index too large" }),
        }
    }

    /// Index list after the letter: `11`, `_11`, `[1,1]`, `_{1,1}` for
    /// entries (`arity` 2) and `7`, `_7`, `[7]`, `_{7}` for products.
    fn indices(&mut self, letter: char, pos: Pos, arity: usize) -> Result<Vec<usize>, ParseError> {
        let text = letter.to_string();
        let mut underscore = false;
        if self.peek_char() == Some('_') {
            self.bump();
            underscore = true;
        }
        let close = match self.peek_char() {
            Some('[') => Some(']'),
            Some('{') if underscore => Some('}'),
            _ => None,
        };
        if let Some(close) = close {
            self.bump();
            let mut out = Vec::with_capacity(arity);
            for i in 0..arity {
                if i > 0 {
                    self.expect_char(',', pos, &text)?;
                }
                out.push(self.number(pos, &text)?);
            }
            self.expect_char(close, pos, &text)?;
            return Ok(out);
        }
        let digits = self.take_digits();
        if digits.is_empty() {
            return Err(ParseError::BadIndex { pos, text, reason: "missing index" });
        }
        let full = format!("{letter}{digits}");
        if arity == 1 {
            return match digits.parse::<usize>() {
                Ok(0) => Err(ParseError::BadIndex { pos, text: full, reason: "products are numbered from 1" }),
                Ok(k) if k <= 1 << 20 => Ok(vec![k]),
                _ => Err(ParseError::BadIndex { pos, text: full, reason: "index too large" }),
            };
        }
        if digits.len() != 2 {
            return Err(ParseError::BadIndex {
                pos,
                text: full,
                reason: "compact entries need exactly two digits; use a[i,j]",
            });
        }
        let b = digits.as_bytes();
        let (i, j) = ((b[0] - b'0') as usize, (b[1] - b'0') as usize);
        if i == 0 || j == 0 {
            return Err(ParseError::BadIndex { pos, text: full, reason: "indices start at 1" });
        }
        Ok(vec![i, j])
    }

    fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_spaces();
            let Some(&(offset, c)) = self.chars.peek() else { break };
            let pos = self.pos_of(offset);
            let kind = match c {
                '\n' => {
                    self.bump();
                    self.line += 1;
                    self.line_start = offset + 1;
                    TokenKind::Newline
                }
                '#' => {
                    self.skip_comment();
                    continue;
                }
                '/' => {
                    self.bump();
                    if self.peek_char() != Some('/') {
                        return Err(ParseError::Lex { pos, found: '/' });
                    }
                    self.skip_comment();
                    continue;
                }
                ';' | ',' => {
                    self.bump();
                    TokenKind::Separator
                }
                '+' => {
                    self.bump();
                    TokenKind::Plus
                }
                '*' => {
                    self.bump();
                    TokenKind::Times
                }
                '(' => {
                    self.bump();
                    TokenKind::LParen
                }
                ')' => {
                    self.bump();
                    TokenKind::RParen
                }
                '=' => {
                    self.bump();
                    TokenKind::Assign
                }
                ':' => {
                    self.bump();
                    if self.peek_char() != Some('=') {
                        return Err(ParseError::Lex { pos, found: ':' });
                    }
                    self.bump();
                    TokenKind::Assign
                }
                '0' => {
                    self.bump();
                    if self.peek_char().is_some_and(|c| c.is_ascii_alphanumeric()) {
                        return Err(ParseError::Lex { pos, found: self.peek_char().unwrap() });
                    }
                    TokenKind::Zero
                }
                'a' | 'A' | 'b' | 'B' | 'c' | 'C' => {
                    self.bump();
                    let kind = match c.to_ascii_lowercase() {
                        'a' => EntryKind::A,
                        'b' => EntryKind::B,
                        _ => EntryKind::C,
                    };
                    let idx = self.indices(c, pos, 2)?;
                    TokenKind::Entry(kind, idx[0] - 1, idx[1] - 1)
                }
                'm' | 'M' => {
                    self.bump();
                    let idx = self.indices(c, pos, 1)?;
                    TokenKind::MRef(idx[0])
                }
                other => return Err(ParseError::Lex { pos, found: other }),
            };
            let word = matches!(kind, TokenKind::Entry(..) | TokenKind::MRef(_) | TokenKind::Zero);
            if let Some(alnum) = self.peek_char().filter(|c| word && (c.is_alphanumeric() || *c == '_')) {
                let (o, _) = *self.chars.peek().unwrap();
                return Err(ParseError::Lex { pos: self.pos_of(o), found: alnum });
            }
            out.push(Token { kind, pos });
        }
        Ok(out)
    }

    fn skip_comment(&mut self) {
        while self.peek_char().is_some_and(|c| c != '\n') {
            self.bump();
        }
    }
}

/// Splits scheme text into tokens.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    Lexer::new(text).tokenize()
}

// ---------------------------------------------------------------------------
// parser

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    end: Pos,
}

/// One linear form as parsed: the entries with odd multiplicity.
struct Form {
    kind: Option<EntryKind>,
    entries: Vec<(usize, usize)>,
    pos: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn skip_newlines(&mut self) {
        while self.peek().is_some_and(|t| t.kind == TokenKind::Newline) {
            self.at += 1;
        }
    }

    fn syntax(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::Syntax { pos: t.pos, expected, found: t.kind.to_string() },
            None => ParseError::Syntax { pos: self.end, expected, found: "end of input".into() },
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    /// `entry`, `0`, or a parenthesised `+`-sum of those.
    fn factor(&mut self) -> Result<Form, ParseError> {
        self.skip_newlines();
        let pos = self.peek().map_or(self.end, |t| t.pos);
        let mut form = Form { kind: None, entries: Vec::new(), pos };
        if self.eat(&TokenKind::LParen) {
            loop {
                self.skip_newlines();
                self.form_term(&mut form)?;
                self.skip_newlines();
                if self.eat(&TokenKind::RParen) {
                    break;
                }
                if !self.eat(&TokenKind::Plus) {
                    return Err(self.syntax("'+' or ')'"));
                }
            }
        } else {
            self.form_term(&mut form)?;
        }
        Ok(form)
    }

    fn form_term(&mut self, form: &mut Form) -> Result<(), ParseError> {
        match self.peek().map(|t| (t.kind.clone(), t.pos)) {
            Some((TokenKind::Zero, _)) => {
                self.at += 1;
                Ok(())
            }
            Some((TokenKind::Entry(kind, i, j), pos)) if kind != EntryKind::C => {
                self.at += 1;
                match form.kind {
                    Some(k) if k != kind => return Err(ParseError::MixedFactor { pos }),
                    _ => form.kind = Some(kind),
                }
                toggle(&mut form.entries, (i, j));
                Ok(())
            }
            _ => Err(self.syntax("an a- or b-entry")),
        }
    }

    fn product_sum(&mut self) -> Result<Vec<(usize, Pos)>, ParseError> {
        self.skip_newlines();
        let parens = self.eat(&TokenKind::LParen);
        let mut refs = Vec::new();
        loop {
            self.skip_newlines();
            match self.next() {
                Some(Token { kind: TokenKind::MRef(k), pos }) => refs.push((k, pos)),
                Some(Token { kind: TokenKind::Zero, .. }) => {}
                _ => {
                    self.at -= 1;
                    return Err(self.syntax("a product reference m<k>"));
                }
            }
            if parens {
                self.skip_newlines();
            }
            if !self.eat(&TokenKind::Plus) {
                break;
            }
        }
        if parens {
            self.skip_newlines();
            if !self.eat(&TokenKind::RParen) {
                return Err(self.syntax("')'"));
            }
        }
        Ok(refs)
    }

    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        match self.peek().map(|t| &t.kind) {
            None | Some(TokenKind::Separator) | Some(TokenKind::Newline) => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.syntax("';' or end of line")),
        }
    }
}

fn toggle<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if let Some(i) = v.iter().position(|y| *y == x) {
        v.swap_remove(i);
    } else {
        v.push(x);
    }
}

struct ProductDef {
    alpha: Vec<(usize, usize)>,
    beta: Vec<(usize, usize)>,
}

/// Parses the expression format into a scheme.
///
/// Dimensions are the largest indices seen. Every product `m1..mK` and
/// every output entry must be defined exactly once; a product mentioned
/// twice in one output sum cancels.
pub fn parse_expression_file(text: &str) -> Result<Scheme, ParseError> {
    let tokens = tokenize(text)?;
    let end = {
        let line = text.split('\n').count();
        let col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Pos { line, col }
    };
    let mut parser = Parser { tokens, at: 0, end };

    let mut products: HashMap<usize, ProductDef> = HashMap::new();
    let mut outputs: HashMap<(usize, usize), Vec<(usize, Pos)>> = HashMap::new();
    let (mut n, mut m, mut p) = (0usize, 0usize, 0usize);

    loop {
        parser.skip_newlines();
        while parser.eat(&TokenKind::Separator) {
            parser.skip_newlines();
        }
        let Some(head) = parser.next() else { break };
        match head.kind {
            TokenKind::MRef(k) => {
                if !parser.eat(&TokenKind::Assign) {
                    return Err(parser.syntax("':='"));
                }
                let left = parser.factor()?;
                parser.skip_newlines();
                if !parser.eat(&TokenKind::Times) {
                    return Err(parser.syntax("'*'"));
                }
                let right = parser.factor()?;
                parser.end_of_statement()?;
                if left.kind == Some(EntryKind::B) || right.kind == Some(EntryKind::A) {
                    return Err(ParseError::FactorOrder {
                        pos: if left.kind == Some(EntryKind::B) { left.pos } else { right.pos },
                    });
                }
                for &(i, j) in &left.entries {
                    n = n.max(i + 1);
                    m = m.max(j + 1);
                }
                for &(i, j) in &right.entries {
                    m = m.max(i + 1);
                    p = p.max(j + 1);
                }
                if products.insert(k, ProductDef { alpha: left.entries, beta: right.entries }).is_some() {
                    return Err(ParseError::DuplicateProduct { pos: head.pos, k });
                }
            }
            TokenKind::Entry(EntryKind::C, i, j) => {
                if !parser.eat(&TokenKind::Assign) {
                    return Err(parser.syntax("':='"));
                }
                let refs = parser.product_sum()?;
                parser.end_of_statement()?;
                n = n.max(i + 1);
                p = p.max(j + 1);
                if outputs.insert((i, j), refs).is_some() {
                    return Err(ParseError::DuplicateEntry { pos: head.pos, i: i + 1, j: j + 1 });
                }
            }
            _ => {
                parser.at -= 1;
                return Err(parser.syntax("a definition of m<k> or c<i><j>"));
            }
        }
    }

    if products.is_empty() {
        return Err(ParseError::Empty);
    }
    let rank = *products.keys().max().unwrap();
    for k in 1..=rank {
        if !products.contains_key(&k) {
            // report the first use of the gap, if there is one
            if let Some(pos) =
                outputs.values().flatten().filter(|(r, _)| *r == k).map(|&(_, pos)| pos).min_by_key(|p| (p.line, p.col))
            {
                return Err(ParseError::UndefinedProduct { pos, k });
            }
            return Err(ParseError::MissingProduct { k, max: rank });
        }
    }
    let mut undefined: Vec<(Pos, usize)> =
        outputs.values().flatten().filter(|(k, _)| *k > rank).map(|&(k, pos)| (pos, k)).collect();
    undefined.sort_by_key(|(p, _)| (p.line, p.col));
    if let Some(&(pos, k)) = undefined.first() {
        return Err(ParseError::UndefinedProduct { pos, k });
    }
    // dimensions can come from products alone if every c-entry is absent;
    // that case is reported below as a missing entry
    let (n, m, p) = (n.max(1), m.max(1), p.max(1));
    for i in 0..n {
        for j in 0..p {
            if !outputs.contains_key(&(i, j)) {
                return Err(ParseError::MissingEntry { i: i + 1, j: j + 1 });
            }
        }
    }

    let mut prods: Vec<Product> = (1..=rank)
        .map(|k| {
            let def = &products[&k];
            let mut alpha = BitMatrix::zeros(n, m);
            for &(i, j) in &def.alpha {
                alpha.set(i, j, true);
            }
            let mut beta = BitMatrix::zeros(m, p);
            for &(i, j) in &def.beta {
                beta.set(i, j, true);
            }
            Product::new(alpha, beta, BitMatrix::zeros(n, p))
        })
        .collect();
    for (&(i, j), refs) in &outputs {
        for &(k, _) in refs {
            prods[k - 1].gamma.toggle(i, j);
        }
    }
    Ok(Scheme::new(n, m, p, prods).expect("masks are built to the inferred dimensions"))
}

fn entry_name(letter: char, i: usize, j: usize, compact: bool) -> String {
    if compact {
        format!("{letter}{}{}", i + 1, j + 1)
    } else {
        format!("{letter}[{},{}]", i + 1, j + 1)
    }
}

fn linear_form(letter: char, mask: &BitMatrix, compact: bool) -> String {
    let terms: Vec<String> = mask.ones().map(|(i, j)| entry_name(letter, i, j, compact)).collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

/// Writes the expression format: products in list order, then output
/// entries row-major. No trailing newline.
pub fn serialize_expression(s: &Scheme) -> String {
    let compact = s.n().max(s.m()).max(s.p()) <= 9;
    let mut lines = Vec::with_capacity(s.rank() + s.n() * s.p());
    for (k, prod) in s.products().iter().enumerate() {
        lines.push(format!(
            "m{} := ({})*({});",
            k + 1,
            linear_form('a', &prod.alpha, compact),
            linear_form('b', &prod.beta, compact)
        ));
    }
    for u in 0..s.n() {
        for v in 0..s.p() {
            let refs: Vec<String> = s
                .products()
                .iter()
                .enumerate()
                .filter(|(_, prod)| prod.gamma.get(u, v))
                .map(|(k, _)| format!("m{}", k + 1))
                .collect();
            let rhs = if refs.is_empty() { "0".to_string() } else { refs.join("+") };
            lines.push(format!("{} := {};", entry_name('c', u, v, compact), rhs));
        }
    }
    lines.join("\n")
}

/// Size in bytes of the canonical encoding.
pub fn canonical_len(n: usize, m: usize, p: usize, rank: usize) -> usize {
    HEADER_LEN + rank * 8 * (n * words_per_row(m) + m * words_per_row(p) + n * words_per_row(p))
}

pub fn write_canonical(s: &Scheme) -> Vec<u8> {
    let (n, m, p) = s.dims();
    let mut out = Vec::with_capacity(canonical_len(n, m, p, s.rank()));
    out.extend_from_slice(CANONICAL_MAGIC);
    for d in [n, m, p, s.rank()] {
        out.extend_from_slice(&u32::try_from(d).expect("dimension fits in u32").to_le_bytes());
    }
    for prod in s.products() {
        for side in Side::ALL {
            for w in prod.mask(side).words() {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
    }
    out
}

pub fn read_canonical(bytes: &[u8]) -> Result<Scheme, CanonicalError> {
    if bytes.len() < CANONICAL_MAGIC.len() || &bytes[..CANONICAL_MAGIC.len()] != CANONICAL_MAGIC {
        return Err(CanonicalError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(CanonicalError::Truncated { needed: HEADER_LEN, available: bytes.len() });
    }
    let field = |i: usize| {
        let at = CANONICAL_MAGIC.len() + 4 * i;
        u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
    };
    let (n, m, p, rank) = (field(0), field(1), field(2), field(3));
    if n == 0 || m == 0 || p == 0 {
        return Err(CanonicalError::ZeroDimension { n, m, p });
    }
    let per_product = [n * words_per_row(m), m * words_per_row(p), n * words_per_row(p)];
    let needed = per_product
        .iter()
        .sum::<usize>()
        .checked_mul(8)
        .and_then(|b| b.checked_mul(rank))
        .and_then(|b| b.checked_add(HEADER_LEN))
        .unwrap_or(usize::MAX);
    if bytes.len() < needed {
        return Err(CanonicalError::Truncated { needed, available: bytes.len() });
    }
    if bytes.len() > needed {
        return Err(CanonicalError::TrailingBytes { extra: bytes.len() - needed });
    }

    let mut words = bytes[HEADER_LEN..].chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap()));
    let shapes = [(n, m), (m, p), (n, p)];
    let mut products = Vec::with_capacity(rank);
    for index in 0..rank {
        let mut masks = Vec::with_capacity(3);
        for (side, &(r, c)) in shapes.iter().enumerate() {
            let w: Vec<u64> = words.by_ref().take(per_product[side]).collect();
            masks.push(BitMatrix::from_words(r, c, w).map_err(|source| CanonicalError::Mask { index, source })?);
        }
        let gamma = masks.pop().unwrap();
        let beta = masks.pop().unwrap();
        let alpha = masks.pop().unwrap();
        products.push(Product::new(alpha, beta, gamma));
    }
    Ok(Scheme::new(n, m, p, products).expect("masks are decoded to the header's shapes"))
}

/// Reads either format, picking the canonical one when the magic is present.
pub fn read_scheme(bytes: &[u8]) -> Result<Scheme, ReadError> {
    if bytes.starts_with(CANONICAL_MAGIC) {
        return Ok(read_canonical(bytes)?);
    }
    let text = std::str::from_utf8(bytes).map_err(|_| ReadError::Utf8)?;
    Ok(parse_expression_file(text)?)
}
