//! Exact point counts: boxes, fibers, shells, height regions and the
//! Möbius inversion from all pairs to primitive pairs.

pub(crate) mod enumerate;
mod region;
mod shell;
pub(crate) mod solver;
mod table;

pub use enumerate::{
    box_points, count_box, count_box_chunked, count_fiber, height_exponents, CountError,
    ShellCounts, DEFAULT_CHUNK,
};
pub use region::{cardinality, normalize_line, BoxSpec, ExclusionPredicate, Predicates, Rational};
pub use shell::{
    count_projective, moebius_assembly, moebius_sum, shell_table, shell_table_with,
    upsilon_direct, upsilon_direct_real, Approximate, ArithmeticFunction2, Constant, FromFn,
    ShellFunction, ShellTable, SparseTable,
};
pub use table::{projective_count_table, CountParam, CountRow, CountTable};
