//! Tiling instances and their compilation into grid-forcing formulas.
//!
//! A tile instance is compiled to the formula that is satisfiable exactly
//! when the instance tiles the positive quadrant; the recurring variant adds
//! the row-deletion announcement that detects a designated tile recurring in
//! the first column. Finite truncations of a solution are built as concrete
//! models (five states per grid cell, agents `h`, `v`, `s`) so the
//! constructions can be exercised at desk scale.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{agent_set, AgentSet, Formula};
use crate::kripke::{Model, ModelBuilder};

pub const POSITIONS: [&str; 5] = ["north", "south", "east", "west", "centre"];

/// Sides of a tile, in the fixed position order (without `centre`).
pub const SIDES: [Side; 4] = [Side::North, Side::South, Side::East, Side::West];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    North,
    South,
    East,
    West,
}

impl Side {
    pub fn prop(self) -> &'static str {
        match self {
            Side::North => "north",
            Side::South => "south",
            Side::East => "east",
            Side::West => "west",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Color(pub String);

impl Color {
    pub fn new(name: impl Into<String>) -> Self {
        Color(name.into())
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A tile: one color per side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    pub north: Color,
    pub south: Color,
    pub east: Color,
    pub west: Color,
}

impl Tile {
    pub fn side(&self, side: Side) -> &Color {
        match side {
            Side::North => &self.north,
            Side::South => &self.south,
            Side::East => &self.east,
            Side::West => &self.west,
        }
    }
}

/// A finite tile set with color palette and optional designated tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileInstance {
    pub colors: Vec<Color>,
    pub tiles: Vec<Tile>,
    pub star: Option<usize>,
}

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("invalid tile instance: {0}")]
    InvalidInstance(String),
    #[error("invalid grid truncation: {0}")]
    InvalidGrid(String),
    #[error("unknown component tag `{0}`")]
    UnknownTag(String),
    #[error("the instance has no designated tile")]
    MissingStar,
    #[error("search bound exceeded: {cells} cells with {tiles} tiles (limit: 64 cells, 8 tiles)")]
    BoundExceeded { cells: usize, tiles: usize },
    #[error("tiling file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl TileInstance {
    pub fn new(colors: Vec<Color>, tiles: Vec<Tile>, star: Option<usize>) -> Result<Self, TilingError> {
        let inst = TileInstance { colors, tiles, star };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), TilingError> {
        if self.tiles.is_empty() {
            return Err(TilingError::InvalidInstance("tile list is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.colors {
            if !seen.insert(c) {
                return Err(TilingError::InvalidInstance(format!(
                    "duplicate color `{c}`"
                )));
            }
        }
        for (i, tile) in self.tiles.iter().enumerate() {
            for side in SIDES {
                if !self.colors.contains(tile.side(side)) {
                    return Err(TilingError::InvalidInstance(format!(
                        "tile {i} uses color `{}` outside the palette",
                        tile.side(side)
                    )));
                }
            }
        }
        if let Some(star) = self.star {
            if star >= self.tiles.len() {
                return Err(TilingError::InvalidInstance(format!(
                    "star index {star} out of range"
                )));
            }
        }
        Ok(())
    }

    /// Proposition naming: `tile_<i>` for ordinary tiles, `pstar` for the
    /// designated one.
    pub fn tile_prop(&self, i: usize) -> String {
        if self.star == Some(i) {
            "pstar".to_owned()
        } else {
            format!("tile_{i}")
        }
    }

    pub fn from_json_str(json: &str) -> Result<Self, TilingError> {
        let file: TileInstanceFile = serde_json::from_str(json)?;
        TileInstance::new(
            file.colors.into_iter().map(Color).collect(),
            file.tiles
                .into_iter()
                .map(|t| Tile {
                    north: Color(t.north),
                    south: Color(t.south),
                    east: Color(t.east),
                    west: Color(t.west),
                })
                .collect(),
            file.star,
        )
    }

    pub fn to_json_string(&self) -> String {
        let file = TileInstanceFile {
            colors: self.colors.iter().map(|c| c.0.clone()).collect(),
            tiles: self
                .tiles
                .iter()
                .map(|t| TileFile {
                    north: t.north.0.clone(),
                    south: t.south.0.clone(),
                    east: t.east.0.clone(),
                    west: t.west.0.clone(),
                })
                .collect(),
            star: self.star,
        };
        serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TileInstanceFile {
    colors: Vec<String>,
    tiles: Vec<TileFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    star: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TileFile {
    north: String,
    south: String,
    east: String,
    west: String,
}

/// A finite `width x height` fragment of a tiling. `assignment[j][i]` is the
/// tile index at column `i`, row `j`, rows listed bottom-up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridTruncation {
    pub width: usize,
    pub height: usize,
    pub assignment: Vec<Vec<usize>>,
}

impl GridTruncation {
    pub fn tile_at(&self, i: usize, j: usize) -> usize {
        self.assignment[j][i]
    }

    /// Checks dimensions, indices, and the side-matching conditions between
    /// adjacent cells.
    pub fn validate(&self, instance: &TileInstance) -> Result<(), TilingError> {
        if self.width == 0 || self.height == 0 {
            return Err(TilingError::InvalidGrid("zero dimension".into()));
        }
        if self.assignment.len() != self.height
            || self.assignment.iter().any(|row| row.len() != self.width)
        {
            return Err(TilingError::InvalidGrid("assignment shape mismatch".into()));
        }
        for row in &self.assignment {
            for &t in row {
                if t >= instance.tiles.len() {
                    return Err(TilingError::InvalidGrid(format!("tile index {t} out of range")));
                }
            }
        }
        for j in 0..self.height {
            for i in 0..self.width {
                let t = &instance.tiles[self.tile_at(i, j)];
                if i + 1 < self.width {
                    let right = &instance.tiles[self.tile_at(i + 1, j)];
                    if t.east != right.west {
                        return Err(TilingError::InvalidGrid(format!(
                            "east/west mismatch between ({i},{j}) and ({},{j})",
                            i + 1
                        )));
                    }
                }
                if j + 1 < self.height {
                    let above = &instance.tiles[self.tile_at(i, j + 1)];
                    if t.north != above.south {
                        return Err(TilingError::InvalidGrid(format!(
                            "north/south mismatch between ({i},{j}) and ({i},{})",
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json_str(json: &str) -> Result<Self, TilingError> {
        let file: GridFile = serde_json::from_str(json)?;
        Ok(GridTruncation {
            width: file.width,
            height: file.height,
            assignment: file.assignment,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GridFile {
            width: self.width,
            height: self.height,
            assignment: self.assignment.clone(),
        })
        .expect("grid serialization cannot fail")
    }

    /// The bottom-left `w x h` sub-grid; adjacency conditions are inherited.
    pub fn crop(&self, w: usize, h: usize) -> GridTruncation {
        let w = w.min(self.width);
        let h = h.min(self.height);
        GridTruncation {
            width: w,
            height: h,
            assignment: self.assignment[..h].iter().map(|row| row[..w].to_vec()).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    width: usize,
    height: usize,
    assignment: Vec<Vec<usize>>,
}

/// Which quantifier stands at the `[!]` positions of the compiled formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantifierFlavor {
    #[default]
    Apal,
    Gal,
    Cal,
}

impl fmt::Display for QuantifierFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantifierFlavor::Apal => write!(f, "apal"),
            QuantifierFlavor::Gal => write!(f, "gal"),
            QuantifierFlavor::Cal => write!(f, "cal"),
        }
    }
}

impl std::str::FromStr for QuantifierFlavor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "apal" => Ok(QuantifierFlavor::Apal),
            "gal" => Ok(QuantifierFlavor::Gal),
            "cal" => Ok(QuantifierFlavor::Cal),
            other => Err(format!("unknown quantifier flavor `{other}`")),
        }
    }
}

/// The named building blocks of the grid-forcing formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentTag {
    OneColour,
    AllParts,
    Hor,
    Vert,
    OnePos,
    OneTile,
    StateCol,
    AdjTiles,
    Init,
    Up,
    Right,
    RightUp,
    UpRight,
    NoChange,
    TileLeft,
}

pub const ALL_COMPONENTS: [ComponentTag; 15] = [
    ComponentTag::OneColour,
    ComponentTag::AllParts,
    ComponentTag::Hor,
    ComponentTag::Vert,
    ComponentTag::OnePos,
    ComponentTag::OneTile,
    ComponentTag::StateCol,
    ComponentTag::AdjTiles,
    ComponentTag::Init,
    ComponentTag::Up,
    ComponentTag::Right,
    ComponentTag::RightUp,
    ComponentTag::UpRight,
    ComponentTag::NoChange,
    ComponentTag::TileLeft,
];

impl ComponentTag {
    /// The five conjuncts that carry an announcement quantifier.
    pub fn is_quantified(self) -> bool {
        matches!(
            self,
            ComponentTag::Up
                | ComponentTag::Right
                | ComponentTag::RightUp
                | ComponentTag::UpRight
                | ComponentTag::NoChange
        )
    }
}

impl fmt::Display for ComponentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ComponentTag::OneColour => "one_colour",
            ComponentTag::AllParts => "all_parts",
            ComponentTag::Hor => "hor",
            ComponentTag::Vert => "vert",
            ComponentTag::OnePos => "one_pos",
            ComponentTag::OneTile => "one_tile",
            ComponentTag::StateCol => "state_col",
            ComponentTag::AdjTiles => "adj_tiles",
            ComponentTag::Init => "init",
            ComponentTag::Up => "up",
            ComponentTag::Right => "right",
            ComponentTag::RightUp => "right&up",
            ComponentTag::UpRight => "up&right",
            ComponentTag::NoChange => "no_change",
            ComponentTag::TileLeft => "tile_left",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ComponentTag {
    type Err = TilingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_COMPONENTS
            .iter()
            .find(|t| t.to_string() == s)
            .copied()
            .ok_or_else(|| TilingError::UnknownTag(s.to_owned()))
    }
}

fn hvs() -> AgentSet {
    agent_set(["h", "v", "s"])
}

fn atom(name: &str) -> Formula {
    Formula::atom(name)
}

fn dia_s(f: Formula) -> Formula {
    Formula::know_dia("s", f)
}

/// `K s (north -> K v (south -> f))`: step to the tile above.
fn box_up(f: Formula) -> Formula {
    Formula::know(
        "s",
        atom("north").implies(Formula::know("v", atom("south").implies(f))),
    )
}

fn dia_up(f: Formula) -> Formula {
    box_up(f.not()).not()
}

/// `K s (east -> K h (west -> f))`: step to the tile to the right.
fn box_right(f: Formula) -> Formula {
    Formula::know(
        "s",
        atom("east").implies(Formula::know("h", atom("west").implies(f))),
    )
}

fn dia_right(f: Formula) -> Formula {
    box_right(f.not()).not()
}

fn quantify(flavor: QuantifierFlavor, body: Formula) -> Formula {
    match flavor {
        QuantifierFlavor::Apal => Formula::apal_box(body),
        QuantifierFlavor::Gal => Formula::gal_box(hvs(), body),
        QuantifierFlavor::Cal => Formula::cal_box(hvs(), body),
    }
}

/// Compiles one named conjunct of the grid-forcing formula. The quantifier
/// flavor only affects the five quantified components.
pub fn compile_component(
    instance: &TileInstance,
    tag: ComponentTag,
    flavor: QuantifierFlavor,
) -> Result<Formula, TilingError> {
    instance.validate()?;
    let positions: Vec<Formula> = POSITIONS.iter().map(|q| atom(q)).collect();
    let f = match tag {
        // Exactly one color — at non-centre states only, since centre states
        // carry no color in the grid construction.
        ComponentTag::OneColour => {
            let body = Formula::big_or(
                instance
                    .colors
                    .iter()
                    .map(|c| {
                        let others = instance
                            .colors
                            .iter()
                            .filter(|d| *d != c)
                            .map(|d| atom(&d.0).not())
                            .collect();
                        atom(&c.0).and(Formula::big_and(others))
                    })
                    .collect(),
            );
            atom("centre").not().implies(body)
        }
        ComponentTag::AllParts => Formula::know("s", Formula::big_or(positions.clone())).and(
            Formula::big_and(positions.iter().map(|q| dia_s(q.clone())).collect()),
        ),
        ComponentTag::Hor => Formula::big_and(
            ["north", "south", "centre"]
                .iter()
                .map(|q| atom(q).implies(Formula::know("h", atom(q))))
                .collect(),
        ),
        ComponentTag::Vert => Formula::big_and(
            ["east", "west", "centre"]
                .iter()
                .map(|q| atom(q).implies(Formula::know("v", atom(q))))
                .collect(),
        ),
        ComponentTag::OnePos => Formula::big_or(
            POSITIONS
                .iter()
                .map(|q| {
                    let others = POSITIONS
                        .iter()
                        .filter(|p| p != &q)
                        .map(|p| atom(p).not())
                        .collect();
                    atom(q).and(Formula::big_and(others))
                })
                .collect(),
        ),
        ComponentTag::OneTile => Formula::big_or(
            (0..instance.tiles.len())
                .map(|i| {
                    let pi = atom(&instance.tile_prop(i));
                    let others = (0..instance.tiles.len())
                        .filter(|&j| j != i)
                        .map(|j| atom(&instance.tile_prop(j)).not())
                        .collect();
                    pi.clone()
                        .and(Formula::know("s", pi).and(Formula::big_and(others)))
                })
                .collect(),
        ),
        ComponentTag::StateCol => Formula::big_or(
            (0..instance.tiles.len())
                .map(|i| {
                    let sides = SIDES
                        .iter()
                        .map(|&side| {
                            atom(side.prop()).implies(atom(&instance.tiles[i].side(side).0))
                        })
                        .collect();
                    atom(&instance.tile_prop(i)).implies(Formula::big_and(sides))
                })
                .collect(),
        ),
        ComponentTag::AdjTiles => Formula::big_and(
            instance
                .colors
                .iter()
                .map(|c| {
                    let vert = atom("north")
                        .and(atom(&c.0))
                        .implies(dia_s_free("v", "south").and(Formula::know("v", atom(&c.0))));
                    let hor = atom("east")
                        .and(atom(&c.0))
                        .implies(dia_s_free("h", "west").and(Formula::know("h", atom(&c.0))));
                    vert.and(hor)
                })
                .collect(),
        ),
        ComponentTag::Init => Formula::common_dia(
            hvs(),
            Formula::common(
                agent_set(["v", "s"]),
                atom("west").implies(Formula::know("h", atom("west"))),
            )
            .and(Formula::common(
                agent_set(["h", "s"]),
                atom("south").implies(Formula::know("v", atom("south"))),
            )),
        ),
        ComponentTag::Up => quantify(
            flavor,
            dia_up(dia_s(atom("centre"))).implies(box_up(dia_s(atom("centre")))),
        ),
        ComponentTag::Right => quantify(
            flavor,
            dia_right(dia_s(atom("centre"))).implies(box_right(dia_s(atom("centre")))),
        ),
        ComponentTag::RightUp => quantify(
            flavor,
            dia_right(dia_up(dia_s(atom("centre"))))
                .implies(box_up(box_right(dia_s(atom("centre"))))),
        ),
        ComponentTag::UpRight => quantify(
            flavor,
            dia_up(dia_right(dia_s(atom("centre"))))
                .implies(box_right(box_up(dia_s(atom("centre"))))),
        ),
        ComponentTag::NoChange => Formula::big_and(
            POSITIONS
                .iter()
                .flat_map(|q| POSITIONS.iter().map(move |q2| (q, q2)))
                .map(|(q, q2)| {
                    let sees = dia_s(atom(q2));
                    quantify(
                        flavor,
                        atom(q).and(sees.clone()).implies(
                            Formula::know("h", atom(q).implies(sees.clone()))
                                .and(Formula::know("v", atom(q).implies(sees))),
                        ),
                    )
                })
                .collect(),
        ),
        ComponentTag::TileLeft => atom("pstar").implies(Formula::know(
            "s",
            atom("west").implies(Formula::know("h", atom("west"))),
        )),
    };
    Ok(f)
}

/// `~K a ~q` for a position atom; keeps `adj_tiles` readable above.
fn dia_s_free(agent: &str, q: &str) -> Formula {
    Formula::know_dia(agent, atom(q))
}

/// The single-tile conjunct group.
pub fn compile_psi_tile(instance: &TileInstance) -> Result<Formula, TilingError> {
    let f = |tag| compile_component(instance, tag, QuantifierFlavor::Apal);
    Ok(Formula::big_and(vec![
        f(ComponentTag::OneColour)?,
        f(ComponentTag::AllParts)?,
        f(ComponentTag::Hor)?,
        f(ComponentTag::Vert)?,
        f(ComponentTag::OnePos)?,
        f(ComponentTag::OneTile)?,
        f(ComponentTag::StateCol)?,
    ]))
}

/// The quantified conjunct group.
pub fn compile_psi_xy(
    instance: &TileInstance,
    flavor: QuantifierFlavor,
) -> Result<Formula, TilingError> {
    let f = |tag| compile_component(instance, tag, flavor);
    Ok(Formula::big_and(vec![
        f(ComponentTag::Up)?,
        f(ComponentTag::Right)?,
        f(ComponentTag::RightUp)?,
        f(ComponentTag::UpRight)?,
        f(ComponentTag::NoChange)?,
    ]))
}

/// The grid-forcing formula: common knowledge among `{h, v, s}` of the five
/// conjunct groups.
pub fn compile_psi(
    instance: &TileInstance,
    flavor: QuantifierFlavor,
) -> Result<Formula, TilingError> {
    let f = |tag| compile_component(instance, tag, flavor);
    Ok(Formula::common(
        hvs(),
        Formula::big_and(vec![
            compile_psi_tile(instance)?,
            f(ComponentTag::AdjTiles)?,
            f(ComponentTag::Init)?,
            compile_psi_xy(instance, flavor)?,
            f(ComponentTag::TileLeft)?,
        ]),
    ))
}

/// The recurring-tile formula: the grid formula conjoined with "after
/// deleting every row carrying the designated tile, no grid remains",
/// throughout the first column.
pub fn compile_recurring(
    instance: &TileInstance,
    flavor: QuantifierFlavor,
) -> Result<Formula, TilingError> {
    if instance.star.is_none() {
        return Err(TilingError::MissingStar);
    }
    let psi = compile_psi(instance, flavor)?;
    let deletion = Formula::common(agent_set(["h", "s"]), atom("pstar").not());
    Ok(psi.clone().and(Formula::common(
        agent_set(["v", "s"]),
        Formula::announce(deletion, psi.not()),
    )))
}

/// State name of position `pos` of the cell at column `i`, row `j`.
pub fn grid_state_name(i: usize, j: usize, pos: char) -> String {
    format!("s_{i}_{j}_{pos}")
}

const POS_CHARS: [char; 5] = ['n', 's', 'e', 'w', 'c'];

/// Builds the model of a grid truncation: five states per cell, agent `s`
/// linking the cell's states, `v` linking north states to the south state of
/// the cell above, `h` linking east states to the west state of the cell to
/// the right. Side states carry their tile's side color; centre states carry
/// no color; all five states carry the cell's tile proposition. `pstar` is
/// always declared, empty when the instance has no designated tile. The
/// designated state is the east state of the origin cell.
pub fn build_grid_model(
    instance: &TileInstance,
    grid: &GridTruncation,
) -> Result<Model, TilingError> {
    instance.validate()?;
    grid.validate(instance)?;
    let (w, h) = (grid.width, grid.height);
    let mut states = Vec::with_capacity(w * h * 5);
    for j in 0..h {
        for i in 0..w {
            for pos in POS_CHARS {
                states.push(grid_state_name(i, j, pos));
            }
        }
    }
    let mut builder = ModelBuilder::new().states(states).agents(["h", "v", "s"]);

    let mut s_blocks = Vec::new();
    let mut v_blocks = Vec::new();
    let mut h_blocks = Vec::new();
    for j in 0..h {
        for i in 0..w {
            s_blocks.push(POS_CHARS.iter().map(|&p| grid_state_name(i, j, p)).collect());
            // v pairs north with the south of the cell above; everything else
            // is a singleton.
            if j + 1 < h {
                v_blocks.push(vec![grid_state_name(i, j, 'n'), grid_state_name(i, j + 1, 's')]);
            } else {
                v_blocks.push(vec![grid_state_name(i, j, 'n')]);
            }
            if j == 0 {
                v_blocks.push(vec![grid_state_name(i, j, 's')]);
            }
            for p in ['e', 'w', 'c'] {
                v_blocks.push(vec![grid_state_name(i, j, p)]);
            }
            if i + 1 < w {
                h_blocks.push(vec![grid_state_name(i, j, 'e'), grid_state_name(i + 1, j, 'w')]);
            } else {
                h_blocks.push(vec![grid_state_name(i, j, 'e')]);
            }
            if i == 0 {
                h_blocks.push(vec![grid_state_name(i, j, 'w')]);
            }
            for p in ['n', 's', 'c'] {
                h_blocks.push(vec![grid_state_name(i, j, p)]);
            }
        }
    }
    let owned = |blocks: Vec<Vec<String>>| {
        crate::kripke::RelationSpec::Blocks(blocks)
    };
    builder = builder
        .relation("s", owned(s_blocks))
        .relation("v", owned(v_blocks))
        .relation("h", owned(h_blocks));

    // Position propositions.
    for (pc, pname) in POS_CHARS.iter().zip(POSITIONS) {
        let members = (0..h)
            .flat_map(|j| (0..w).map(move |i| grid_state_name(i, j, *pc)))
            .collect();
        builder = builder.prop_states(pname, members);
    }
    // Colors: each side state carries its tile's color on that side.
    for color in &instance.colors {
        let mut members = Vec::new();
        for j in 0..h {
            for i in 0..w {
                let tile = &instance.tiles[grid.tile_at(i, j)];
                for (side, pc) in SIDES.iter().zip(['n', 's', 'e', 'w']) {
                    if tile.side(*side) == color {
                        members.push(grid_state_name(i, j, pc));
                    }
                }
            }
        }
        builder = builder.prop_states(color.0.clone(), members);
    }
    // Tile propositions on all five states of their cells.
    for t in 0..instance.tiles.len() {
        let mut members = Vec::new();
        for j in 0..h {
            for i in 0..w {
                if grid.tile_at(i, j) == t {
                    members.extend(POS_CHARS.iter().map(|&p| grid_state_name(i, j, p)));
                }
            }
        }
        builder = builder.prop_states(instance.tile_prop(t), members);
    }
    if instance.star.is_none() {
        builder = builder.prop_states("pstar", Vec::new());
    }
    builder = builder.designated(grid_state_name(0, 0, 'e'));
    builder
        .build()
        .map_err(|e| TilingError::InvalidGrid(e.to_string()))
}

/// Deterministic backtracking search for a valid truncation: cells are filled
/// bottom row first, left to right, trying tile indices in ascending order,
/// so the result is the first assignment in lexicographic order. When
/// `star_rows` is given, the designated tile is placed exactly at column 0 of
/// those rows and nowhere else.
pub fn brute_force_tile(
    instance: &TileInstance,
    width: usize,
    height: usize,
    star_rows: Option<&BTreeSet<usize>>,
) -> Result<Option<GridTruncation>, TilingError> {
    instance.validate()?;
    if width == 0 || height == 0 {
        return Err(TilingError::InvalidGrid("zero dimension".into()));
    }
    if width * height > 64 || instance.tiles.len() > 8 {
        return Err(TilingError::BoundExceeded {
            cells: width * height,
            tiles: instance.tiles.len(),
        });
    }
    let star = match star_rows {
        Some(rows) => {
            let star = instance.star.ok_or(TilingError::MissingStar)?;
            if let Some(&r) = rows.iter().find(|&&r| r >= height) {
                return Err(TilingError::InvalidGrid(format!(
                    "star row {r} outside a height-{height} grid"
                )));
            }
            Some((star, rows.clone()))
        }
        None => None,
    };
    let mut assignment = vec![vec![usize::MAX; width]; height];
    if fill(instance, width, height, &star, &mut assignment, 0) {
        let grid = GridTruncation {
            width,
            height,
            assignment,
        };
        debug_assert!(grid.validate(instance).is_ok());
        Ok(Some(grid))
    } else {
        Ok(None)
    }
}

fn fill(
    instance: &TileInstance,
    width: usize,
    height: usize,
    star: &Option<(usize, BTreeSet<usize>)>,
    assignment: &mut Vec<Vec<usize>>,
    cell: usize,
) -> bool {
    if cell == width * height {
        return true;
    }
    let (j, i) = (cell / width, cell % width);
    for t in 0..instance.tiles.len() {
        if let Some((star_tile, rows)) = star {
            let must_be_star = i == 0 && rows.contains(&j);
            if must_be_star != (t == *star_tile) {
                continue;
            }
        }
        let tile = &instance.tiles[t];
        if i > 0 && instance.tiles[assignment[j][i - 1]].east != tile.west {
            continue;
        }
        if j > 0 && instance.tiles[assignment[j - 1][i]].north != tile.south {
            continue;
        }
        assignment[j][i] = t;
        if fill(instance, width, height, star, assignment, cell + 1) {
            return true;
        }
    }
    assignment[j][i] = usize::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Fragment;

    fn single_tile_instance() -> TileInstance {
        let c = Color::new("grey");
        TileInstance::new(
            vec![c.clone()],
            vec![Tile {
                north: c.clone(),
                south: c.clone(),
                east: c.clone(),
                west: c,
            }],
            None,
        )
        .unwrap()
    }

    fn checker_instance() -> TileInstance {
        let red = Color::new("red");
        let blue = Color::new("blue");
        let t = |n: &Color, s: &Color, e: &Color, w: &Color| Tile {
            north: n.clone(),
            south: s.clone(),
            east: e.clone(),
            west: w.clone(),
        };
        TileInstance::new(
            vec![red.clone(), blue.clone()],
            vec![
                t(&red, &blue, &red, &blue),
                t(&red, &blue, &blue, &red),
                t(&blue, &red, &red, &blue),
                t(&blue, &red, &blue, &red),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn one_colour_single_color_collapses() {
        let inst = single_tile_instance();
        let f = compile_component(&inst, ComponentTag::OneColour, QuantifierFlavor::Apal).unwrap();
        // Guarded by ~centre; the core is the color conjoined with the empty
        // negation conjunction.
        let expected = Formula::atom("centre")
            .not()
            .implies(Formula::atom("grey").and(Formula::Top));
        assert_eq!(f, expected);
    }

    #[test]
    fn psi_tile_has_seven_conjuncts() {
        let inst = checker_instance();
        let f = |tag| compile_component(&inst, tag, QuantifierFlavor::Apal).unwrap();
        let expected = Formula::big_and(vec![
            f(ComponentTag::OneColour),
            f(ComponentTag::AllParts),
            f(ComponentTag::Hor),
            f(ComponentTag::Vert),
            f(ComponentTag::OnePos),
            f(ComponentTag::OneTile),
            f(ComponentTag::StateCol),
        ]);
        assert_eq!(compile_psi_tile(&inst).unwrap(), expected);
    }

    #[test]
    fn psi_xy_has_five_conjuncts() {
        let inst = checker_instance();
        let f = |tag| compile_component(&inst, tag, QuantifierFlavor::Apal).unwrap();
        let expected = Formula::big_and(vec![
            f(ComponentTag::Up),
            f(ComponentTag::Right),
            f(ComponentTag::RightUp),
            f(ComponentTag::UpRight),
            f(ComponentTag::NoChange),
        ]);
        assert_eq!(compile_psi_xy(&inst, QuantifierFlavor::Apal).unwrap(), expected);
    }

    #[test]
    fn psi_root_is_common_hvs() {
        let inst = checker_instance();
        let f = compile_psi(&inst, QuantifierFlavor::Apal).unwrap();
        match f {
            Formula::Common(g, _) => assert_eq!(g, agent_set(["h", "v", "s"])),
            other => panic!("expected common knowledge root, got {other}"),
        }
    }

    fn count_quantifiers(f: &Formula) -> (usize, usize, usize) {
        match f {
            Formula::Atom(_) | Formula::Top => (0, 0, 0),
            Formula::Not(x) => count_quantifiers(x),
            Formula::And(a, b) | Formula::Announce(a, b) => {
                let (x1, y1, z1) = count_quantifiers(a);
                let (x2, y2, z2) = count_quantifiers(b);
                (x1 + x2, y1 + y2, z1 + z2)
            }
            Formula::Know(_, x) | Formula::Common(_, x) => count_quantifiers(x),
            Formula::ApalBox(x) => {
                let (a, g, c) = count_quantifiers(x);
                (a + 1, g, c)
            }
            Formula::GalBox(grp, x) => {
                assert_eq!(*grp, agent_set(["h", "v", "s"]));
                let (a, g, c) = count_quantifiers(x);
                (a, g + 1, c)
            }
            Formula::CalBox(grp, x) => {
                assert_eq!(*grp, agent_set(["h", "v", "s"]));
                let (a, g, c) = count_quantifiers(x);
                (a, g, c + 1)
            }
        }
    }

    #[test]
    fn flavor_substitutes_every_quantifier() {
        let inst = checker_instance();
        // 4 from up/right/right&up/up&right, 25 from no_change.
        assert_eq!(
            count_quantifiers(&compile_psi(&inst, QuantifierFlavor::Apal).unwrap()),
            (29, 0, 0)
        );
        assert_eq!(
            count_quantifiers(&compile_psi(&inst, QuantifierFlavor::Gal).unwrap()),
            (0, 29, 0)
        );
        assert_eq!(
            count_quantifiers(&compile_psi(&inst, QuantifierFlavor::Cal).unwrap()),
            (0, 0, 29)
        );
    }

    #[test]
    fn component_fragments() {
        let inst = checker_instance();
        for tag in ALL_COMPONENTS {
            let f = compile_component(&inst, tag, QuantifierFlavor::Apal).unwrap();
            let frag = f.fragment();
            if tag.is_quantified() {
                assert_eq!(frag, Fragment::Apalc, "{tag}");
            } else {
                assert!(frag <= Fragment::Palc, "{tag}: {frag}");
            }
        }
        let up_gal = compile_component(&inst, ComponentTag::Up, QuantifierFlavor::Gal).unwrap();
        assert_eq!(up_gal.fragment(), Fragment::Galc);
        let up_cal = compile_component(&inst, ComponentTag::Up, QuantifierFlavor::Cal).unwrap();
        assert_eq!(up_cal.fragment(), Fragment::Calc);
    }

    #[test]
    fn quantified_body_depths() {
        let inst = checker_instance();
        let body = |tag| match compile_component(&inst, tag, QuantifierFlavor::Apal).unwrap() {
            Formula::ApalBox(b) => *b,
            other => panic!("expected a quantifier, got {other}"),
        };
        // A step abbreviation contributes two knowledge levels; the bodies
        // nest one step plus the final inspection, or two steps plus it.
        assert_eq!(body(ComponentTag::Up).modal_depth(), 3);
        assert_eq!(body(ComponentTag::Right).modal_depth(), 3);
        assert_eq!(body(ComponentTag::RightUp).modal_depth(), 5);
        assert_eq!(body(ComponentTag::UpRight).modal_depth(), 5);
    }

    #[test]
    fn recurring_structure() {
        let c = Color::new("grey");
        let tile = Tile {
            north: c.clone(),
            south: c.clone(),
            east: c.clone(),
            west: c.clone(),
        };
        let inst = TileInstance::new(vec![c], vec![tile.clone(), tile], Some(1)).unwrap();
        let f = compile_recurring(&inst, QuantifierFlavor::Apal).unwrap();
        let psi = compile_psi(&inst, QuantifierFlavor::Apal).unwrap();
        let deletion = Formula::common(agent_set(["h", "s"]), Formula::atom("pstar").not());
        let expected = psi.clone().and(Formula::common(
            agent_set(["v", "s"]),
            Formula::announce(deletion, psi.not()),
        ));
        assert_eq!(f, expected);
        assert_eq!(f.fragment(), Fragment::Apalc);

        let starless = single_tile_instance();
        assert!(matches!(
            compile_recurring(&starless, QuantifierFlavor::Apal),
            Err(TilingError::MissingStar)
        ));
    }

    #[test]
    fn grid_model_1x1() {
        let inst = single_tile_instance();
        let grid = brute_force_tile(&inst, 1, 1, None).unwrap().unwrap();
        let m = build_grid_model(&inst, &grid).unwrap();
        assert_eq!(m.n_states(), 5);
        let s_ix = m.agent_ix(&"s".into()).unwrap();
        assert_eq!(m.partition(s_ix).blocks().len(), 1);
        for agent in ["h", "v"] {
            let ai = m.agent_ix(&agent.into()).unwrap();
            assert_eq!(m.partition(ai).blocks().len(), 5, "{agent}");
        }
        assert!(m.validate().is_valid());
    }

    #[test]
    fn grid_model_2x2_links() {
        let inst = checker_instance();
        let grid = brute_force_tile(&inst, 2, 2, None).unwrap().unwrap();
        let m = build_grid_model(&inst, &grid).unwrap();
        assert_eq!(m.n_states(), 20);
        // (0,0,n) and (0,1,s) share a v-block.
        let v = m.agent_class(&"v".into(), &grid_state_name(0, 0, 'n')).unwrap();
        let partner = m.state_ix(&grid_state_name(0, 1, 's')).unwrap();
        assert!(v.contains(partner));
        assert_eq!(v.len(), 2);
        // (0,0,n) satisfies north and its tile's north color.
        let n_state = m.state_ix(&grid_state_name(0, 0, 'n')).unwrap();
        let north = m.prop_ix(&"north".into()).unwrap();
        assert!(m.prop_extension(north).contains(n_state));
        let tile = &inst.tiles[grid.tile_at(0, 0)];
        let color_ix = m.prop_ix(&tile.north.0.as_str().into()).unwrap();
        assert!(m.prop_extension(color_ix).contains(n_state));
        // Centre states carry no color.
        let c_state = m.state_ix(&grid_state_name(0, 0, 'c')).unwrap();
        for color in &inst.colors {
            let ci = m.prop_ix(&color.0.as_str().into()).unwrap();
            assert!(!m.prop_extension(ci).contains(c_state));
        }
        // The agent-class example: the square agent reaches the whole cell.
        let s_class = m.agent_class(&"s".into(), &grid_state_name(0, 0, 'e')).unwrap();
        assert_eq!(s_class.len(), 5);
    }

    #[test]
    fn brute_force_uniform_tile_any_size() {
        let inst = single_tile_instance();
        let grid = brute_force_tile(&inst, 4, 3, None).unwrap().unwrap();
        assert!(grid.assignment.iter().flatten().all(|&t| t == 0));
    }

    #[test]
    fn brute_force_unsatisfiable_horizontal() {
        let a = Color::new("a");
        let b = Color::new("b");
        // Both tiles expose east=a but demand west=b: no horizontal pair.
        let t1 = Tile {
            north: a.clone(),
            south: a.clone(),
            east: a.clone(),
            west: b.clone(),
        };
        let inst = TileInstance::new(vec![a, b], vec![t1.clone(), t1], None).unwrap();
        assert!(brute_force_tile(&inst, 2, 1, None).unwrap().is_none());
        assert!(brute_force_tile(&inst, 1, 1, None).unwrap().is_some());
    }

    #[test]
    fn brute_force_checker_4x4_validates() {
        let inst = checker_instance();
        let grid = brute_force_tile(&inst, 4, 4, None).unwrap().unwrap();
        grid.validate(&inst).unwrap();
    }

    #[test]
    fn brute_force_star_rows() {
        let c = Color::new("grey");
        let tile = Tile {
            north: c.clone(),
            south: c.clone(),
            east: c.clone(),
            west: c.clone(),
        };
        let inst = TileInstance::new(vec![c], vec![tile.clone(), tile], Some(1)).unwrap();
        let rows: BTreeSet<usize> = [0, 2].into();
        let grid = brute_force_tile(&inst, 3, 4, Some(&rows)).unwrap().unwrap();
        for j in 0..4 {
            for i in 0..3 {
                let is_star = grid.tile_at(i, j) == 1;
                assert_eq!(is_star, i == 0 && rows.contains(&j), "({i},{j})");
            }
        }
        // Starless instance with star rows requested.
        let starless = single_tile_instance();
        assert!(matches!(
            brute_force_tile(&starless, 2, 2, Some(&rows)),
            Err(TilingError::MissingStar)
        ));
    }

    #[test]
    fn bound_exceeded() {
        let inst = single_tile_instance();
        assert!(matches!(
            brute_force_tile(&inst, 9, 9, None),
            Err(TilingError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn instance_json_roundtrip() {
        let inst = checker_instance();
        let j = inst.to_json_string();
        assert_eq!(TileInstance::from_json_str(&j).unwrap(), inst);
        assert!(TileInstance::from_json_str(r#"{"colors":[],"tiles":[],"bogus":1}"#).is_err());
    }

    #[test]
    fn grid_json_roundtrip() {
        let inst = checker_instance();
        let grid = brute_force_tile(&inst, 3, 2, None).unwrap().unwrap();
        let j = grid.to_json_string();
        assert_eq!(GridTruncation::from_json_str(&j).unwrap(), grid);
    }
}
