//! Files in and out: technology profiles, CSV tables and SVG charts.

pub mod plot;
pub mod profile_file;
pub mod table;

pub use plot::{render_plot, render_svg, Chart, Scale, Series, Style};
pub use profile_file::{bundled_profile, load_profile, parse_profile, profile_to_json};
pub use table::{write_csv, Cell, ResultTable};
