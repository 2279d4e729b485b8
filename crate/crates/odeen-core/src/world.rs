//! The Odeen universe: pieces, fixed-length structures, the canonical
//! integer codec enumerating the whole universe, and text renderings.
//!
//! Cells are listed left to right: index 0 is the leftmost cell, and the
//! leftmost cell is the most significant digit of the canonical ID.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The shape variants of an occupied cell, in canonical code order.
pub const SHAPE_VARIANT_NAMES: [&str; 3] = ["block", "pyramid_up", "pyramid_down"];

/// Tokens that carry grammatical meaning in the rule language; color names
/// must not collide with them.
const RESERVED_TOKENS: [&str; 17] = [
    "at_least",
    "exactly",
    "at_most",
    "zero",
    "1",
    "2",
    "pyramid",
    "block",
    "pointing_up",
    "pointing_down",
    "touching",
    "surrounded_by",
    "at_the_right_of",
    "and",
    "or",
    "_",
    "is",
];

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid world configuration: {0}")]
    InvalidConfig(String),
    #[error("structure id {id} out of range (universe size {universe_size})")]
    IdOutOfRange { id: u64, universe_size: u64 },
    #[error("cannot parse structure: {0}")]
    ParseStructure(String),
    #[error("invalid glyph table: {0}")]
    InvalidGlyphTable(String),
}

/// Parameters of the universe. Only `length` and `colors` vary; the shape
/// variants are fixed to [`SHAPE_VARIANT_NAMES`] because the rule grammar's
/// shape terminals (`block`, `pyramid`, `pointing_up`, `pointing_down`) are
/// bound to them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldConfig {
    /// Cells per structure.
    pub length: usize,
    /// Ordered color names; color index is the position in this list.
    pub colors: Vec<String>,
    /// Ordered shape-variant names; must equal [`SHAPE_VARIANT_NAMES`].
    pub shape_variants: Vec<String>,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self::new(6, &["red", "blue"]).expect("default config is valid")
    }
}

impl WorldConfig {
    pub fn new(length: usize, colors: &[&str]) -> Result<Self, WorldError> {
        let config = Self {
            length,
            colors: colors.iter().map(|c| c.to_string()).collect(),
            shape_variants: SHAPE_VARIANT_NAMES.iter().map(|s| s.to_string()).collect(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if self.length == 0 {
            return Err(WorldError::InvalidConfig("length must be positive".into()));
        }
        if self.length > 32 {
            return Err(WorldError::InvalidConfig(
                "length above 32 is not supported".into(),
            ));
        }
        if self.colors.is_empty() {
            return Err(WorldError::InvalidConfig("at least one color".into()));
        }
        if self.shape_variants != SHAPE_VARIANT_NAMES {
            return Err(WorldError::InvalidConfig(format!(
                "shape variants must be {SHAPE_VARIANT_NAMES:?}"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for color in &self.colors {
            if color.is_empty() || !color.chars().all(|c| c.is_ascii_lowercase()) {
                return Err(WorldError::InvalidConfig(format!(
                    "color name {color:?} must be non-empty ascii lowercase"
                )));
            }
            if RESERVED_TOKENS.contains(&color.as_str()) {
                return Err(WorldError::InvalidConfig(format!(
                    "color name {color:?} collides with a language token"
                )));
            }
            if !seen.insert(color) {
                return Err(WorldError::InvalidConfig(format!(
                    "duplicate color {color:?}"
                )));
            }
        }
        // alphabet_size^length must fit in u64
        let mut size: u64 = 1;
        for _ in 0..self.length {
            size = size.checked_mul(self.alphabet_size() as u64).ok_or_else(|| {
                WorldError::InvalidConfig("universe size overflows u64".into())
            })?;
        }
        Ok(())
    }

    /// 1 (empty) + |colors| * |shape variants| distinct piece values.
    pub fn alphabet_size(&self) -> usize {
        1 + self.colors.len() * self.shape_variants.len()
    }

    /// alphabet_size ^ length.
    pub fn universe_size(&self) -> u64 {
        (self.alphabet_size() as u64).pow(self.length as u32)
    }

    pub fn n_shapes(&self) -> usize {
        self.shape_variants.len()
    }
}

/// Shape of an occupied cell; discriminant equals the variant code order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Block = 0,
    PyramidUp = 1,
    PyramidDown = 2,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Block, Shape::PyramidUp, Shape::PyramidDown];

    pub fn variant_index(self) -> usize {
        self as usize
    }

    pub fn from_variant_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn variant_name(self) -> &'static str {
        SHAPE_VARIANT_NAMES[self.variant_index()]
    }
}

/// One cell of a structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    Empty,
    Occupied { color: u8, shape: Shape },
}

impl Piece {
    /// Canonical code: empty is 0, occupied is `1 + color * |shapes| + shape`.
    pub fn code(self, config: &WorldConfig) -> usize {
        match self {
            Piece::Empty => 0,
            Piece::Occupied { color, shape } => {
                1 + color as usize * config.n_shapes() + shape.variant_index()
            }
        }
    }

    pub fn from_code(code: usize, config: &WorldConfig) -> Option<Self> {
        if code == 0 {
            return Some(Piece::Empty);
        }
        if code >= config.alphabet_size() {
            return None;
        }
        let k = code - 1;
        Some(Piece::Occupied {
            color: (k / config.n_shapes()) as u8,
            shape: Shape::from_variant_index(k % config.n_shapes())?,
        })
    }

    /// Token form: `_` for empty, `<color>_<variant>` otherwise.
    pub fn token(self, config: &WorldConfig) -> String {
        match self {
            Piece::Empty => "_".to_string(),
            Piece::Occupied { color, shape } => {
                format!("{}_{}", config.colors[color as usize], shape.variant_name())
            }
        }
    }

    pub fn from_token(token: &str, config: &WorldConfig) -> Result<Self, WorldError> {
        if token == "_" {
            return Ok(Piece::Empty);
        }
        for (ci, color) in config.colors.iter().enumerate() {
            if let Some(rest) = token.strip_prefix(color.as_str()) {
                if let Some(variant) = rest.strip_prefix('_') {
                    if let Some(vi) = SHAPE_VARIANT_NAMES.iter().position(|v| *v == variant) {
                        return Ok(Piece::Occupied {
                            color: ci as u8,
                            shape: Shape::from_variant_index(vi).unwrap(),
                        });
                    }
                }
            }
        }
        Err(WorldError::ParseStructure(format!(
            "unknown piece token {token:?}"
        )))
    }
}

/// A point of the universe: a fixed-length sequence of pieces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    cells: Vec<Piece>,
}

impl Structure {
    pub fn from_pieces(cells: Vec<Piece>, config: &WorldConfig) -> Result<Self, WorldError> {
        if cells.len() != config.length {
            return Err(WorldError::ParseStructure(format!(
                "expected {} cells, got {}",
                config.length,
                cells.len()
            )));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[Piece] {
        &self.cells
    }

    /// Canonical ID: base-`alphabet_size` digits, leftmost cell most
    /// significant.
    pub fn id(&self, config: &WorldConfig) -> u64 {
        let base = config.alphabet_size() as u64;
        self.cells
            .iter()
            .fold(0, |acc, piece| acc * base + piece.code(config) as u64)
    }
}

/// Decodes a canonical ID into its structure; inverse of [`Structure::id`].
pub fn structure_from_id(id: u64, config: &WorldConfig) -> Result<Structure, WorldError> {
    let universe_size = config.universe_size();
    if id >= universe_size {
        return Err(WorldError::IdOutOfRange { id, universe_size });
    }
    let base = config.alphabet_size() as u64;
    let mut cells = vec![Piece::Empty; config.length];
    let mut rest = id;
    for cell in cells.iter_mut().rev() {
        *cell = Piece::from_code((rest % base) as usize, config).unwrap();
        rest /= base;
    }
    Ok(Structure { cells })
}

/// Decodes an ID directly into piece codes, most significant first.
pub fn codes_from_id(id: u64, config: &WorldConfig) -> Vec<u8> {
    let base = config.alphabet_size() as u64;
    let mut codes = vec![0u8; config.length];
    let mut rest = id;
    for c in codes.iter_mut().rev() {
        *c = (rest % base) as u8;
        rest /= base;
    }
    codes
}

/// Rendering mode for [`render_structure`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderMode {
    Token,
    Emoji,
}

/// Glyph table for emoji rendering: one glyph per piece code.
#[derive(Clone, Debug)]
pub struct GlyphTable {
    glyphs: Vec<String>,
}

const DEFAULT_GLYPHS: [&str; 7] = ["⬜", "🟥", "🔺", "🔻", "🟦", "🔼", "🔽"];

impl GlyphTable {
    /// Built-in table. The default world gets distinct emoji; other worlds
    /// fall back to one base-36 digit per code.
    pub fn default_for(config: &WorldConfig) -> Self {
        let n = config.alphabet_size();
        let glyphs = if n == DEFAULT_GLYPHS.len() {
            DEFAULT_GLYPHS.iter().map(|g| g.to_string()).collect()
        } else {
            (0..n)
                .map(|code| {
                    char::from_digit(code as u32, 36)
                        .expect("alphabet_size <= 36")
                        .to_string()
                })
                .collect()
        };
        Self { glyphs }
    }

    /// Parses a `code=glyph` table, one entry per line; `#` starts a comment.
    pub fn from_config_str(text: &str, config: &WorldConfig) -> Result<Self, WorldError> {
        let mut glyphs = vec![String::new(); config.alphabet_size()];
        let mut seen = vec![false; config.alphabet_size()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (code_text, glyph) = line.split_once('=').ok_or_else(|| {
                WorldError::InvalidGlyphTable(format!("line {}: expected code=glyph", lineno + 1))
            })?;
            let code: usize = code_text.trim().parse().map_err(|_| {
                WorldError::InvalidGlyphTable(format!("line {}: bad code", lineno + 1))
            })?;
            if code >= config.alphabet_size() {
                return Err(WorldError::InvalidGlyphTable(format!(
                    "line {}: code {code} out of range",
                    lineno + 1
                )));
            }
            if seen[code] {
                return Err(WorldError::InvalidGlyphTable(format!(
                    "duplicate entry for code {code}"
                )));
            }
            if glyph.is_empty() {
                return Err(WorldError::InvalidGlyphTable(format!(
                    "line {}: empty glyph",
                    lineno + 1
                )));
            }
            glyphs[code] = glyph.to_string();
            seen[code] = true;
        }
        if let Some(code) = seen.iter().position(|s| !s) {
            return Err(WorldError::InvalidGlyphTable(format!(
                "missing glyph for code {code}"
            )));
        }
        let mut distinct = std::collections::HashSet::new();
        for glyph in &glyphs {
            if !distinct.insert(glyph.as_str()) {
                return Err(WorldError::InvalidGlyphTable(format!(
                    "glyph {glyph:?} used twice"
                )));
            }
        }
        Ok(Self { glyphs })
    }

    pub fn glyph(&self, code: usize) -> &str {
        &self.glyphs[code]
    }
}

/// Renders a structure as text. Token mode joins piece tokens with single
/// spaces; emoji mode concatenates one glyph per cell.
pub fn render_structure(
    structure: &Structure,
    mode: RenderMode,
    config: &WorldConfig,
    glyphs: &GlyphTable,
) -> String {
    match mode {
        RenderMode::Token => structure
            .cells()
            .iter()
            .map(|p| p.token(config))
            .collect::<Vec<_>>()
            .join(" "),
        RenderMode::Emoji => structure
            .cells()
            .iter()
            .map(|p| glyphs.glyph(p.code(config)))
            .collect(),
    }
}

/// Token-mode rendering with the built-in glyph table.
pub fn render_structure_tokens(structure: &Structure, config: &WorldConfig) -> String {
    structure
        .cells()
        .iter()
        .map(|p| p.token(config))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses token-mode text back into a structure; whitespace-normalized.
pub fn parse_structure_tokens(text: &str, config: &WorldConfig) -> Result<Structure, WorldError> {
    let cells: Vec<Piece> = text
        .split_whitespace()
        .map(|tok| Piece::from_token(tok, config))
        .collect::<Result<_, _>>()?;
    Structure::from_pieces(cells, config)
}

/// Parses emoji-mode text by greedy longest-glyph match.
pub fn parse_structure_emoji(
    text: &str,
    config: &WorldConfig,
    glyphs: &GlyphTable,
) -> Result<Structure, WorldError> {
    let mut rest = text;
    let mut cells = Vec::with_capacity(config.length);
    while !rest.is_empty() {
        let mut best: Option<(usize, usize)> = None; // (code, glyph byte len)
        for code in 0..config.alphabet_size() {
            let g = glyphs.glyph(code);
            if rest.starts_with(g) && best.map_or(true, |(_, len)| g.len() > len) {
                best = Some((code, g.len()));
            }
        }
        let (code, len) = best.ok_or_else(|| {
            WorldError::ParseStructure(format!("unrecognized glyph at {rest:?}"))
        })?;
        cells.push(Piece::from_code(code, config).unwrap());
        rest = &rest[len..];
    }
    Structure::from_pieces(cells, config)
}
