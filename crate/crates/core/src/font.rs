//! Embedded fixed-advance bitmap font.
//!
//! Each glyph lives in a 4x6 reference cell: three ink columns plus one
//! spacing column, five body rows plus one descender row. Glyphs are scaled
//! with nearest-neighbour sampling in integer arithmetic, so a string drawn
//! at a given size always produces the same pixels.

/// Reference cell width in font units (3 ink columns + 1 spacing column).
pub const CELL_WIDTH: u32 = 4;
/// Reference cell height in font units (5 body rows + 1 descender row).
pub const CELL_HEIGHT: u32 = 6;
const INK_COLUMNS: u32 = 3;

/// Smallest font size the planners will emit. At or above this size the
/// nearest-neighbour scaling never drops a reference row or column.
pub const MIN_FONT_SIZE: u32 = 6;

const FIRST: u32 = 0x20;
const LAST: u32 = 0x7e;

type Glyph = [u8; 6];

const REPLACEMENT: Glyph = [0b111, 0b111, 0b111, 0b111, 0b111, 0];

// Rows top to bottom; bit 2 is the leftmost column.
#[rustfmt::skip]
static GLYPHS: [Glyph; 95] = [
    [0b000, 0b000, 0b000, 0b000, 0b000, 0b000], // ' '
    [0b010, 0b010, 0b010, 0b000, 0b010, 0b000], // !
    [0b101, 0b101, 0b000, 0b000, 0b000, 0b000], // "
    [0b101, 0b111, 0b101, 0b111, 0b101, 0b000], // #
    [0b011, 0b110, 0b010, 0b011, 0b110, 0b000], // $
    [0b101, 0b001, 0b010, 0b100, 0b101, 0b000], // %
    [0b010, 0b101, 0b010, 0b101, 0b011, 0b000], // &
    [0b010, 0b010, 0b000, 0b000, 0b000, 0b000], // '
    [0b001, 0b010, 0b010, 0b010, 0b001, 0b000], // (
    [0b100, 0b010, 0b010, 0b010, 0b100, 0b000], // )
    [0b000, 0b101, 0b010, 0b101, 0b000, 0b000], // *
    [0b000, 0b010, 0b111, 0b010, 0b000, 0b000], // +
    [0b000, 0b000, 0b000, 0b000, 0b010, 0b100], // ,
    [0b000, 0b000, 0b111, 0b000, 0b000, 0b000], // -
    [0b000, 0b000, 0b000, 0b000, 0b010, 0b000], // .
    [0b001, 0b001, 0b010, 0b100, 0b100, 0b000], // /
    [0b111, 0b101, 0b101, 0b101, 0b111, 0b000], // 0
    [0b010, 0b110, 0b010, 0b010, 0b111, 0b000], // 1
    [0b110, 0b001, 0b010, 0b100, 0b111, 0b000], // 2
    [0b110, 0b001, 0b010, 0b001, 0b110, 0b000], // 3
    [0b101, 0b101, 0b111, 0b001, 0b001, 0b000], // 4
    [0b111, 0b100, 0b110, 0b001, 0b110, 0b000], // 5
    [0b011, 0b100, 0b111, 0b101, 0b111, 0b000], // 6
    [0b111, 0b001, 0b010, 0b100, 0b100, 0b000], // 7
    [0b111, 0b101, 0b111, 0b101, 0b111, 0b000], // 8
    [0b111, 0b101, 0b111, 0b001, 0b110, 0b000], // 9
    [0b000, 0b010, 0b000, 0b010, 0b000, 0b000], // :
    [0b000, 0b010, 0b000, 0b010, 0b100, 0b000], // ;
    [0b001, 0b010, 0b100, 0b010, 0b001, 0b000], // <
    [0b000, 0b111, 0b000, 0b111, 0b000, 0b000], // =
    [0b100, 0b010, 0b001, 0b010, 0b100, 0b000], // >
    [0b111, 0b001, 0b010, 0b000, 0b010, 0b000], // ?
    [0b010, 0b101, 0b111, 0b100, 0b011, 0b000], // @
    [0b010, 0b101, 0b111, 0b101, 0b101, 0b000], // A
    [0b110, 0b101, 0b110, 0b101, 0b110, 0b000], // B
    [0b011, 0b100, 0b100, 0b100, 0b011, 0b000], // C
    [0b110, 0b101, 0b101, 0b101, 0b110, 0b000], // D
    [0b111, 0b100, 0b111, 0b100, 0b111, 0b000], // E
    [0b111, 0b100, 0b111, 0b100, 0b100, 0b000], // F
    [0b011, 0b100, 0b101, 0b101, 0b011, 0b000], // G
    [0b101, 0b101, 0b111, 0b101, 0b101, 0b000], // H
    [0b111, 0b010, 0b010, 0b010, 0b111, 0b000], // I
    [0b001, 0b001, 0b001, 0b101, 0b010, 0b000], // J
    [0b101, 0b101, 0b110, 0b101, 0b101, 0b000], // K
    [0b100, 0b100, 0b100, 0b100, 0b111, 0b000], // L
    [0b101, 0b111, 0b111, 0b101, 0b101, 0b000], // M
    [0b101, 0b111, 0b111, 0b111, 0b101, 0b000], // N
    [0b010, 0b101, 0b101, 0b101, 0b010, 0b000], // O
    [0b110, 0b101, 0b110, 0b100, 0b100, 0b000], // P
    [0b010, 0b101, 0b101, 0b111, 0b011, 0b000], // Q
    [0b110, 0b101, 0b111, 0b110, 0b101, 0b000], // R
    [0b011, 0b100, 0b010, 0b001, 0b110, 0b000], // S
    [0b111, 0b010, 0b010, 0b010, 0b010, 0b000], // T
    [0b101, 0b101, 0b101, 0b101, 0b011, 0b000], // U
    [0b101, 0b101, 0b101, 0b010, 0b010, 0b000], // V
    [0b101, 0b101, 0b111, 0b111, 0b101, 0b000], // W
    [0b101, 0b101, 0b010, 0b101, 0b101, 0b000], // X
    [0b101, 0b101, 0b010, 0b010, 0b010, 0b000], // Y
    [0b111, 0b001, 0b010, 0b100, 0b111, 0b000], // Z
    [0b110, 0b100, 0b100, 0b100, 0b110, 0b000], // [
    [0b100, 0b100, 0b010, 0b001, 0b001, 0b000], // backslash
    [0b011, 0b001, 0b001, 0b001, 0b011, 0b000], // ]
    [0b010, 0b101, 0b000, 0b000, 0b000, 0b000], // ^
    [0b000, 0b000, 0b000, 0b000, 0b111, 0b000], // _
    [0b100, 0b010, 0b000, 0b000, 0b000, 0b000], // `
    [0b000, 0b110, 0b011, 0b101, 0b111, 0b000], // a
    [0b100, 0b110, 0b101, 0b101, 0b110, 0b000], // b
    [0b000, 0b011, 0b100, 0b100, 0b011, 0b000], // c
    [0b001, 0b011, 0b101, 0b101, 0b011, 0b000], // d
    [0b000, 0b011, 0b101, 0b110, 0b011, 0b000], // e
    [0b001, 0b010, 0b111, 0b010, 0b010, 0b000], // f
    [0b000, 0b011, 0b101, 0b111, 0b001, 0b110], // g
    [0b100, 0b110, 0b101, 0b101, 0b101, 0b000], // h
    [0b010, 0b000, 0b010, 0b010, 0b010, 0b000], // i
    [0b001, 0b000, 0b001, 0b001, 0b101, 0b010], // j
    [0b100, 0b101, 0b110, 0b110, 0b101, 0b000], // k
    [0b110, 0b010, 0b010, 0b010, 0b111, 0b000], // l
    [0b000, 0b111, 0b111, 0b111, 0b101, 0b000], // m
    [0b000, 0b110, 0b101, 0b101, 0b101, 0b000], // n
    [0b000, 0b010, 0b101, 0b101, 0b010, 0b000], // o
    [0b000, 0b110, 0b101, 0b101, 0b110, 0b100], // p
    [0b000, 0b011, 0b101, 0b101, 0b011, 0b001], // q
    [0b000, 0b011, 0b100, 0b100, 0b100, 0b000], // r
    [0b000, 0b011, 0b110, 0b011, 0b110, 0b000], // s
    [0b010, 0b111, 0b010, 0b010, 0b011, 0b000], // t
    [0b000, 0b101, 0b101, 0b101, 0b011, 0b000], // u
    [0b000, 0b101, 0b101, 0b111, 0b010, 0b000], // v
    [0b000, 0b101, 0b111, 0b111, 0b111, 0b000], // w
    [0b000, 0b101, 0b010, 0b010, 0b101, 0b000], // x
    [0b000, 0b101, 0b101, 0b011, 0b001, 0b110], // y
    [0b000, 0b111, 0b011, 0b110, 0b111, 0b000], // z
    [0b011, 0b010, 0b110, 0b010, 0b011, 0b000], // {
    [0b010, 0b010, 0b010, 0b010, 0b010, 0b000], // |
    [0b110, 0b010, 0b011, 0b010, 0b110, 0b000], // }
    [0b000, 0b011, 0b110, 0b000, 0b000, 0b000], // ~
];

/// Handle to the embedded font. Font size is the pixel height of one line
/// (the full reference cell, descender included).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GlyphFont;

impl GlyphFont {
    pub fn embedded() -> Self {
        GlyphFont
    }

    /// Horizontal advance in pixels for one glyph at `font_size`.
    pub fn advance(&self, font_size: u32) -> u32 {
        font_size * CELL_WIDTH / CELL_HEIGHT
    }

    pub fn line_height(&self, font_size: u32) -> u32 {
        font_size
    }

    /// Width in pixels of `chars` glyphs on one line.
    pub fn text_width(&self, chars: usize, font_size: u32) -> u64 {
        chars as u64 * u64::from(self.advance(font_size))
    }

    /// Largest font size whose line of `chars` glyphs fits in `width` pixels
    /// and whose line height fits in `height`. `chars == 0` is bounded only
    /// by height.
    pub fn max_size_for(&self, chars: usize, width: u32, height: u32) -> u32 {
        if chars == 0 {
            return height;
        }
        let per_glyph = u64::from(width) / chars as u64;
        // advance(f) = floor(4f/6) <= a  <=>  f <= floor((6a + 5) / 4)
        let by_width = (u64::from(CELL_HEIGHT) * per_glyph + u64::from(CELL_HEIGHT) - 1)
            / u64::from(CELL_WIDTH);
        by_width.min(u64::from(height)) as u32
    }

    fn glyph(&self, c: char) -> &'static Glyph {
        let code = c as u32;
        if (FIRST..=LAST).contains(&code) {
            &GLYPHS[(code - FIRST) as usize]
        } else {
            &REPLACEMENT
        }
    }

    pub fn has_glyph(&self, c: char) -> bool {
        (FIRST..=LAST).contains(&(c as u32))
    }

    /// Whether pixel (`x`, `y`) of `c` scaled into a `w` x `h` box is ink.
    pub fn ink(&self, c: char, x: u32, y: u32, w: u32, h: u32) -> bool {
        debug_assert!(x < w && y < h);
        let col = x * CELL_WIDTH / w;
        let row = y * CELL_HEIGHT / h;
        if col >= INK_COLUMNS {
            return false;
        }
        let bits = self.glyph(c)[row as usize];
        (bits >> (INK_COLUMNS - 1 - col)) & 1 == 1
    }
}
