//! Grid-world geometry: cells, the restricted zone, base station placement,
//! device placement and clustering, and UAV movement.
//!
//! UAVs live on cell centers and move one cell per frame (or hover); IoT
//! devices keep exact continuous coordinates inside the grid extent so that
//! link distances are not quantized.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A planar point in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance to another point.
    pub fn distance(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Integer cell coordinates, column-then-row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }
}

/// One of the five per-frame movement choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    North,
    South,
    East,
    West,
    Hover,
}

impl Direction {
    /// All directions, in the canonical action ordering.
    pub const ALL: [Direction; 5] = [
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
        Direction::Hover,
    ];

    /// Index of this direction in [`Direction::ALL`].
    pub fn index(self) -> usize {
        match self {
            Direction::North => 0,
            Direction::South => 1,
            Direction::East => 2,
            Direction::West => 3,
            Direction::Hover => 4,
        }
    }

    pub fn from_index(idx: usize) -> Direction {
        Direction::ALL[idx]
    }
}

/// Static world geometry parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldConfig {
    pub grid_cells_x: u32,
    pub grid_cells_y: u32,
    /// Edge length of one cell in meters.
    pub cell_size_m: f64,
    /// Base station cell; defaults to the geometric center cell of the grid.
    pub bs_cell: Option<Cell>,
    pub bs_height_m: f64,
    /// No-fly cells.
    pub restricted_cells: Vec<Cell>,
    /// Duration of one frame in seconds; defaults to the navigation time
    /// (cell size / UAV velocity) when resolved against a UAV config.
    pub frame_duration_s: f64,
    /// Seed for device placement.
    pub rng_seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            grid_cells_x: 11,
            grid_cells_y: 11,
            cell_size_m: 100.0,
            bs_cell: None,
            bs_height_m: 15.0,
            restricted_cells: Vec::new(),
            frame_duration_s: 4.0,
            rng_seed: 0,
        }
    }
}

/// Immutable world: valid-cell predicate plus geometry helpers.
///
/// Construction validates the restricted zone; afterwards the world is
/// freely shareable across concurrent episode runners.
#[derive(Clone, Debug)]
pub struct GridWorld {
    cells_x: u32,
    cells_y: u32,
    cell_size: f64,
    bs_cell: Cell,
    bs_height: f64,
    restricted: HashSet<Cell>,
    frame_duration: f64,
    seed: u64,
}

impl GridWorld {
    /// Build a world from a config, rejecting restricted cells outside the
    /// grid and a base station inside the restricted zone.
    pub fn new(config: &WorldConfig) -> Result<Self> {
        if config.grid_cells_x < 1 || config.grid_cells_y < 1 {
            return Err(Error::InvalidConfig(
                "grid must have at least one cell per axis".into(),
            ));
        }
        if config.cell_size_m <= 0.0 {
            return Err(Error::InvalidConfig("cell_size_m must be positive".into()));
        }
        let bs_cell = config
            .bs_cell
            .unwrap_or(Cell::new(config.grid_cells_x / 2, config.grid_cells_y / 2));
        if bs_cell.x >= config.grid_cells_x || bs_cell.y >= config.grid_cells_y {
            return Err(Error::InvalidConfig(format!(
                "base station cell ({}, {}) lies outside the grid",
                bs_cell.x, bs_cell.y
            )));
        }
        let mut restricted = HashSet::new();
        for &cell in &config.restricted_cells {
            if cell.x >= config.grid_cells_x || cell.y >= config.grid_cells_y {
                return Err(Error::InvalidConfig(format!(
                    "restricted cell ({}, {}) lies outside the grid",
                    cell.x, cell.y
                )));
            }
            restricted.insert(cell);
        }
        if restricted.contains(&bs_cell) {
            return Err(Error::InvalidConfig(format!(
                "base station cell ({}, {}) is inside the restricted zone",
                bs_cell.x, bs_cell.y
            )));
        }
        Ok(GridWorld {
            cells_x: config.grid_cells_x,
            cells_y: config.grid_cells_y,
            cell_size: config.cell_size_m,
            bs_cell,
            bs_height: config.bs_height_m,
            restricted,
            frame_duration: config.frame_duration_s,
            seed: config.rng_seed,
        })
    }

    pub fn cells_x(&self) -> u32 {
        self.cells_x
    }

    pub fn cells_y(&self) -> u32 {
        self.cells_y
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame_duration
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Width and height of the grid in meters.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.cells_x as f64 * self.cell_size,
            self.cells_y as f64 * self.cell_size,
        )
    }

    pub fn bs_cell(&self) -> Cell {
        self.bs_cell
    }

    pub fn bs_height(&self) -> f64 {
        self.bs_height
    }

    /// Base station coordinates: the center of its cell.
    pub fn bs_position(&self) -> Point {
        self.cell_center(self.bs_cell)
    }

    /// Whether the cell exists in the grid at all (restricted or not).
    pub fn in_grid(&self, cell: Cell) -> bool {
        cell.x < self.cells_x && cell.y < self.cells_y
    }

    /// Whether a UAV may occupy this cell: inside the grid and not restricted.
    pub fn is_valid_cell(&self, cell: Cell) -> bool {
        self.in_grid(cell) && !self.restricted.contains(&cell)
    }

    /// Center of a cell in meters.
    pub fn cell_center(&self, cell: Cell) -> Point {
        Point::new(
            (cell.x as f64 + 0.5) * self.cell_size,
            (cell.y as f64 + 0.5) * self.cell_size,
        )
    }

    /// The movement successor of `cell` in `direction`, ignoring validity.
    /// `None` when the step leaves the grid entirely.
    fn successor(&self, cell: Cell, direction: Direction) -> Option<Cell> {
        let (dx, dy): (i64, i64) = match direction {
            Direction::North => (0, 1),
            Direction::South => (0, -1),
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
            Direction::Hover => (0, 0),
        };
        let nx = cell.x as i64 + dx;
        let ny = cell.y as i64 + dy;
        if nx < 0 || ny < 0 || nx >= self.cells_x as i64 || ny >= self.cells_y as i64 {
            None
        } else {
            Some(Cell::new(nx as u32, ny as u32))
        }
    }

    /// Apply a movement action. A step that would leave the grid or enter a
    /// restricted cell degrades to hover, keeping the environment total.
    pub fn apply_move(&self, cell: Cell, direction: Direction) -> Cell {
        match self.successor(cell, direction) {
            Some(next) if self.is_valid_cell(next) => next,
            _ => cell,
        }
    }

    /// Whether moving from `cell` in `direction` lands on a valid cell
    /// (hover from a valid cell always counts).
    pub fn move_is_valid(&self, cell: Cell, direction: Direction) -> bool {
        matches!(self.successor(cell, direction), Some(next) if self.is_valid_cell(next))
    }

    /// All valid cells, row-major.
    pub fn valid_cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for y in 0..self.cells_y {
            for x in 0..self.cells_x {
                let cell = Cell::new(x, y);
                if self.is_valid_cell(cell) {
                    cells.push(cell);
                }
            }
        }
        cells
    }
}

/// The UAV swarm's fixed flight parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UavConfig {
    pub count: usize,
    /// Flight altitude in meters.
    pub height: f64,
    /// Horizontal speed in meters/second.
    pub velocity: f64,
    pub duplex: crate::channel::Duplex,
    /// Starting cells; empty means every UAV starts on the base station cell.
    pub start_cells: Vec<Cell>,
}

impl UavConfig {
    pub fn validate(&self, world: &GridWorld) -> Result<()> {
        if self.count < 1 {
            return Err(Error::InvalidConfig("at least one UAV is required".into()));
        }
        if self.velocity <= 0.0 {
            return Err(Error::InvalidConfig("UAV velocity must be positive".into()));
        }
        if !self.start_cells.is_empty() && self.start_cells.len() != self.count {
            return Err(Error::InvalidConfig(format!(
                "{} start cells configured for {} UAVs",
                self.start_cells.len(),
                self.count
            )));
        }
        for &cell in &self.start_cells {
            if !world.is_valid_cell(cell) {
                return Err(Error::InvalidConfig(format!(
                    "UAV start cell ({}, {}) is outside the grid or restricted",
                    cell.x, cell.y
                )));
            }
        }
        Ok(())
    }
}

/// One ground IoT device.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Device {
    pub id: usize,
    pub position: Point,
    /// Importance weight of this device's age in the objective.
    pub weight: f64,
    pub cluster_id: usize,
}

/// A group of devices served together in one frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub member_ids: Vec<usize>,
    pub centroid: Point,
}

/// Drop `count` devices i.i.d. uniform over the grid extent. Deterministic
/// for a fixed seed. Weights default to 1/count.
pub fn place_devices(world: &GridWorld, count: usize, seed: u64) -> Vec<Device> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ext_x, ext_y) = world.extent();
    let weight = 1.0 / count as f64;
    (0..count)
        .map(|id| Device {
            id,
            position: Point::new(rng.random_range(0.0..ext_x), rng.random_range(0.0..ext_y)),
            weight,
            cluster_id: 0,
        })
        .collect()
}

/// Partition devices into ceil(D / capacity) clusters of at most `capacity`
/// members each, assigning `cluster_id` on every device.
///
/// Devices are ordered row-major by position (y band, then x) and filled
/// into clusters sequentially, which keeps clusters spatially coherent
/// without an iterative solver.
pub fn cluster_devices(devices: &mut [Device], capacity: usize) -> Vec<Cluster> {
    assert!(capacity >= 1, "cluster capacity must be at least 1");
    let mut order: Vec<usize> = (0..devices.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (devices[a].position, devices[b].position);
        (pa.y, pa.x, a)
            .partial_cmp(&(pb.y, pb.x, b))
            .expect("device coordinates are finite")
    });

    let mut clusters = Vec::new();
    for (cluster_id, chunk) in order.chunks(capacity).enumerate() {
        let mut centroid = Point::new(0.0, 0.0);
        for &dev_idx in chunk {
            devices[dev_idx].cluster_id = cluster_id;
            centroid.x += devices[dev_idx].position.x;
            centroid.y += devices[dev_idx].position.y;
        }
        centroid.x /= chunk.len() as f64;
        centroid.y /= chunk.len() as f64;
        clusters.push(Cluster {
            id: cluster_id,
            member_ids: chunk.iter().map(|&i| devices[i].id).collect(),
            centroid,
        });
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn world_11() -> GridWorld {
        GridWorld::new(&WorldConfig::default()).unwrap()
    }

    #[test]
    fn extent_matches_grid_dimensions() {
        let world = world_11();
        assert_eq!(world.extent(), (1100.0, 1100.0));
        assert_eq!(world.bs_cell(), Cell::new(5, 5));
        assert_eq!(world.bs_position(), Point::new(550.0, 550.0));
    }

    #[test]
    fn empty_restricted_set_leaves_every_cell_valid() {
        let world = world_11();
        assert_eq!(world.valid_cells().len(), 121);
    }

    #[test]
    fn restricting_all_but_bs_column_leaves_only_that_column() {
        let mut config = WorldConfig::default();
        for x in 0..11 {
            for y in 0..11 {
                if x != 5 {
                    config.restricted_cells.push(Cell::new(x, y));
                }
            }
        }
        let world = GridWorld::new(&config).unwrap();
        let valid = world.valid_cells();
        assert_eq!(valid.len(), 11);
        assert!(valid.iter().all(|c| c.x == 5));
    }

    #[test]
    fn rejects_restricted_cell_outside_grid() {
        let config = WorldConfig {
            restricted_cells: vec![Cell::new(11, 0)],
            ..WorldConfig::default()
        };
        assert!(GridWorld::new(&config).is_err());
    }

    #[test]
    fn rejects_bs_inside_restricted_zone() {
        let config = WorldConfig {
            restricted_cells: vec![Cell::new(5, 5)],
            ..WorldConfig::default()
        };
        assert!(GridWorld::new(&config).is_err());
    }

    #[test]
    fn device_placement_is_deterministic() {
        let world = world_11();
        let a = place_devices(&world, 300, 7);
        let b = place_devices(&world, 300, 7);
        assert_eq!(a.len(), 300);
        for (da, db) in a.iter().zip(&b) {
            assert_eq!(da.position, db.position);
        }
    }

    #[test]
    fn devices_fall_inside_the_extent() {
        let world = world_11();
        let devices = place_devices(&world, 300, 3);
        let (ext_x, ext_y) = world.extent();
        for d in &devices {
            assert!(d.position.x >= 0.0 && d.position.x < ext_x);
            assert!(d.position.y >= 0.0 && d.position.y < ext_y);
        }
        let total_weight: f64 = devices.iter().map(|d| d.weight).sum();
        assert!((total_weight - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_sampler_mean_is_near_the_center() {
        let world = world_11();
        let devices = place_devices(&world, 100_000, 41);
        let n = devices.len() as f64;
        let mean_x: f64 = devices.iter().map(|d| d.position.x).sum::<f64>() / n;
        let mean_y: f64 = devices.iter().map(|d| d.position.y).sum::<f64>() / n;
        let (ext_x, ext_y) = world.extent();
        assert!((mean_x - ext_x / 2.0).abs() < 0.02 * ext_x);
        assert!((mean_y - ext_y / 2.0).abs() < 0.02 * ext_y);
    }

    #[test]
    fn clustering_300_devices_at_capacity_25_gives_12_clusters() {
        let world = world_11();
        let mut devices = place_devices(&world, 300, 7);
        let clusters = cluster_devices(&mut devices, 25);
        assert_eq!(clusters.len(), 12);
        assert!(clusters.iter().all(|c| c.member_ids.len() <= 25));
    }

    #[test]
    fn clustering_all_devices_in_one_cluster_when_capacity_equals_count() {
        let world = world_11();
        let mut devices = place_devices(&world, 40, 7);
        let clusters = cluster_devices(&mut devices, 40);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].member_ids.len(), 40);
    }

    #[test]
    fn clustering_fills_sequentially_with_remainder_last() {
        let world = world_11();
        let mut devices = place_devices(&world, 10, 7);
        let clusters = cluster_devices(&mut devices, 3);
        let sizes: Vec<usize> = clusters.iter().map(|c| c.member_ids.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
    }

    #[test]
    fn clusters_partition_the_device_set() {
        let world = world_11();
        let mut devices = place_devices(&world, 53, 11);
        let clusters = cluster_devices(&mut devices, 7);
        let mut seen = vec![0usize; devices.len()];
        for cluster in &clusters {
            for &id in &cluster.member_ids {
                seen[id] += 1;
            }
        }
        assert!(seen.iter().all(|&count| count == 1));
        for d in &devices {
            assert!(clusters[d.cluster_id].member_ids.contains(&d.id));
        }
    }

    #[test]
    fn north_moves_one_cell_length_up() {
        let world = world_11();
        let from = Cell::new(0, 0);
        let to = world.apply_move(from, Direction::North);
        assert_eq!(to, Cell::new(0, 1));
        let delta = world.cell_center(to).y - world.cell_center(from).y;
        assert_eq!(delta, world.cell_size());
    }

    #[test]
    fn hover_is_identity() {
        let world = world_11();
        for cell in world.valid_cells() {
            assert_eq!(world.apply_move(cell, Direction::Hover), cell);
        }
    }

    #[test]
    fn moves_into_the_restricted_zone_degrade_to_hover() {
        let config = WorldConfig {
            restricted_cells: vec![Cell::new(5, 6)],
            ..WorldConfig::default()
        };
        let world = GridWorld::new(&config).unwrap();
        let from = Cell::new(5, 5);
        assert_eq!(world.apply_move(from, Direction::North), from);
        assert_eq!(world.apply_move(from, Direction::East), Cell::new(6, 5));
    }

    #[test]
    fn moves_off_the_grid_degrade_to_hover() {
        let world = world_11();
        assert_eq!(
            world.apply_move(Cell::new(0, 0), Direction::South),
            Cell::new(0, 0)
        );
        assert_eq!(
            world.apply_move(Cell::new(10, 10), Direction::East),
            Cell::new(10, 10)
        );
    }

    proptest! {
        #[test]
        fn apply_move_always_lands_on_a_valid_cell(
            x in 0u32..7,
            y in 0u32..7,
            dir_idx in 0usize..5,
            restricted in proptest::collection::hash_set((0u32..7, 0u32..7), 0..20),
        ) {
            let mut config = WorldConfig {
                grid_cells_x: 7,
                grid_cells_y: 7,
                ..WorldConfig::default()
            };
            config.restricted_cells = restricted
                .into_iter()
                .map(|(rx, ry)| Cell::new(rx, ry))
                .filter(|&c| c != Cell::new(3, 3))
                .collect();
            let world = GridWorld::new(&config).unwrap();
            let start = Cell::new(x, y);
            prop_assume!(world.is_valid_cell(start));
            let next = world.apply_move(start, Direction::from_index(dir_idx));
            prop_assert!(world.is_valid_cell(next));
        }

        #[test]
        fn opposite_moves_cancel_when_both_valid(x in 0u32..11, y in 0u32..11) {
            let world = world_11();
            let start = Cell::new(x, y);
            for (there, back) in [
                (Direction::North, Direction::South),
                (Direction::East, Direction::West),
            ] {
                if world.move_is_valid(start, there) {
                    let mid = world.apply_move(start, there);
                    prop_assert_eq!(world.apply_move(mid, back), start);
                }
            }
        }
    }
}
