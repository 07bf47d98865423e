//! Sweeps over basis bounds that regenerate the numerical tables and figure
//! series, and the flat-file formats they are written in.

mod config;
mod io;
mod tables;

pub use config::{Conventions, Format, RunConfig, SurvivorRange};
pub use io::{
    format_real, read_csv, write_figures, write_table1, write_table2, write_table3, FIGURE_FILES,
    TABLE1_FILE, TABLE2_FILE, TABLE3_FILE,
};
pub use tables::{
    run_figures, run_moments, run_table1, run_table2, run_table3, CountPoint, CvPoint, FanoPoint,
    FigureData, Table1Row, Table2Row, Table3Report, Table3Row,
};
