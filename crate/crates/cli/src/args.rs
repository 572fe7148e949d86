use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "coarse",
    version,
    about = "Coarse combinatorics of subsets of finitely generated groups"
)]
pub struct Cli {
    /// Group spec: Z, Z^d (d <= 4), F_k (k <= 3) or D_inf.
    #[arg(long, global = true, default_value = "Z")]
    pub group: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Omit the timestamp so identical invocations give identical bytes.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Write the output document here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a staged construction and emit its prefix and certificates.
    Construct(ConstructArgs),
    /// Check a relation or certificate on a finite window.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Pattern censuses and evidence for the translate-limit preorder.
    #[command(subcommand)]
    Limits(LimitsCommand),
    /// Membership in ideals of the coarse preorder.
    #[command(subcommand)]
    Ideal(IdealCommand),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    #[value(name = "thmA")]
    ThmA,
    Infdiv,
    Isolated,
    Sparse,
    Injective,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub name: Construction,
    #[arg(long)]
    pub stages: usize,
    /// JSONL file for the emitted set prefix.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// thmA: write the state here after every stage.
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,
    /// thmA: continue from a saved state.
    #[arg(long, value_name = "PATH")]
    pub resume: Option<PathBuf>,
    /// injective: the infinite-order element g.
    #[arg(long)]
    pub element: Option<String>,
    /// injective: non-identity members per level.
    #[arg(long, default_value_t = 2)]
    pub truncation: usize,
}

#[derive(Args, Debug)]
pub struct Budget {
    #[arg(long, default_value_t = 8)]
    pub max_norm: u32,
    #[arg(long, default_value_t = 16)]
    pub max_size: usize,
}

#[derive(Subcommand, Debug)]
pub enum CheckCommand {
    /// A ∩ ball(R) ⊆ F·B, with F given or searched for.
    Bounded {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        radius: u32,
        /// Check this translator list instead of searching.
        #[arg(long)]
        witness: Option<String>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Bounded distance in both directions.
    Equiv {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        radius: u32,
        #[command(flatten)]
        budget: Budget,
    },
    /// n-divisibility witnesses, from a construction or given explicitly.
    Divisible {
        #[arg(long, value_enum, conflicts_with = "set")]
        construct: Option<Construction>,
        #[arg(long, requires = "construct")]
        stages: Option<usize>,
        #[arg(long)]
        set: Option<String>,
        /// A part of the set (repeatable).
        #[arg(long = "part")]
        parts: Vec<String>,
        /// Translators F_j with A ⊆ F_j·part_j, one per part.
        #[arg(long = "translators")]
        translators: Vec<String>,
        /// Window radius; omitted means the whole finite prefix.
        #[arg(long)]
        radius: Option<u32>,
    },
    /// F·g ⊆ A for some g, for a given F or every F inside ball(r).
    Absorbing {
        #[arg(long)]
        set: String,
        #[arg(long, conflicts_with = "f_radius")]
        f: Option<String>,
        #[arg(long)]
        f_radius: Option<u32>,
        #[arg(long, default_value_t = 64)]
        search_radius: u32,
    },
    /// Anti-absorbing certificates: from thmA, a subgroup, or one pair (T, d).
    AntiAbsorbing {
        #[arg(long, value_enum)]
        construct: Option<Construction>,
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        d: Option<String>,
        /// Subgroup H; certifies F·H is not absorbing.
        #[arg(long, conflicts_with_all = ["construct", "set"])]
        subgroup: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        radius: Option<u32>,
        #[arg(long, default_value_t = 64)]
        max_reps: usize,
    },
    /// Elements of growing isolation, certifying A is not 2-divisible.
    Gap {
        #[arg(long)]
        set: String,
        /// Strictly increasing isolation targets.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<u32>,
        #[arg(long, default_value_t = 32)]
        max_radius: u32,
    },
    /// Two families of pieces with translators, each covering A.
    Paradoxical {
        #[arg(long, default_value = "all")]
        set: String,
        /// `SPEC;g` piece of the first family (repeatable). Without pieces
        /// the classical first-letter decomposition of F_2 is used.
        #[arg(long)]
        first: Vec<String>,
        #[arg(long)]
        second: Vec<String>,
        #[arg(long)]
        radius: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum LimitsCommand {
    /// Distinct patterns of A·g on ball(R) for g in ball(g_range).
    Patterns {
        #[arg(long)]
        set: String,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        g_range: u32,
        /// Also write pattern counts as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Translates of A matching B on each scheduled ball.
    Preorder {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<u32>,
        #[arg(long)]
        g_range: u32,
        /// Match against B′ instead, with B ⊆ forward·B′ and B′ ⊆ backward·B.
        #[arg(long, requires_all = ["forward", "backward"])]
        b_prime: Option<String>,
        #[arg(long)]
        forward: Option<String>,
        #[arg(long)]
        backward: Option<String>,
    },
    /// Reverse evidence for every pattern of A.
    MinimalProbe {
        #[arg(long)]
        set: String,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        g_range: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum IdealCommand {
    /// B ∝ A_n for some generator A_n of the ideal.
    Contains {
        /// Generators separated by `;`.
        #[arg(long, conflicts_with = "finite", required_unless_present = "finite")]
        generators: Option<String>,
        /// The ideal of finite sets, generated by ball(1..=N).
        #[arg(long, value_name = "N")]
        finite: Option<u32>,
        #[arg(long)]
        b: String,
        #[arg(long)]
        radius: u32,
        #[command(flatten)]
        budget: Budget,
    },
}
