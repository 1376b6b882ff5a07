use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use launcher_client::ENDPOINT_ENV;

#[derive(Debug, Parser)]
#[command(name = "launcher", version, about = "Ball launcher simulator, control server and experiments")]
pub struct Cli {
    /// Server configuration file (TOML, or JSON by extension). Its `sim`
    /// section also configures the offline commands.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the control server until interrupted or sent `shutdown`.
    Serve(ServeArgs),
    /// Accuracy series over one launcher parameter; writes the stats CSV.
    Sweep(SweepArgs),
    /// Generate a simulated trajectory data set.
    Dataset(DatasetArgs),
    /// Train the target shooting network on a data set.
    Train(TrainArgs),
    /// Aim at a target grid with a trained network and report the errors.
    Eval(EvalArgs),
    /// Print the effective configuration.
    Config(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub host: Option<String>,
    /// TCP protocol port.
    #[arg(long)]
    pub port: Option<u16>,
    /// HTTP port for the console, `/ws` and `/state`.
    #[arg(long)]
    pub gateway_port: Option<u16>,
    #[arg(long)]
    pub sim_seed: Option<u64>,
    /// Directory with the console build.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "ramp_up")]
    RampUp,
    #[value(name = "stroke_gain")]
    StrokeGain,
    #[value(name = "pinch")]
    Pinch,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated settings; `continuous` is accepted for ramp_up.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub values: Vec<String>,
    /// Launches per setting.
    #[arg(long, default_value_t = 50)]
    pub launches: usize,
    /// Move the orientation away and back before each launch.
    #[arg(long)]
    pub orientation_jump: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long, default_value_t = 3761)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Data set directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch loss CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Full-size network instead of the desk-scale one.
    #[arg(long)]
    pub full: bool,
    /// Train on every trajectory, not only equal-wheel launches.
    #[arg(long)]
    pub all_groups: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Number of grid targets; 1 aims at the grid center.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Seed of the in-process simulator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Launch through a running server instead of an in-process simulator.
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: Option<String>,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON instead of TOML.
    #[arg(long)]
    pub json: bool,
}
