//! `designforge`: verify, search and construct partitionable sets and the
//! designs built from them.

mod cmd;
mod io;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "designforge",
    version,
    about = "Partitionable sets, whist tournaments and optical orthogonal codes"
)]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a pair set against PS, APS or explicit PPS parameters.
    Verify(VerifyArgs),
    /// Search for a pair set.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Build a pair set by a direct construction.
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Whist tournaments from pair sets.
    #[command(subcommand)]
    Whist(WhistCmd),
    /// Cyclic difference matrices.
    #[command(subcommand)]
    Cdm(CdmCmd),
    /// Optical orthogonal codes.
    #[command(subcommand)]
    Ooc(OocCmd),
    /// Shipped witnesses.
    Catalog(CatalogArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecKind {
    Ps,
    Aps,
    Pps,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Pair set JSON: {"v": .., "pairs": [[x, y], ..]}.
    #[arg(long)]
    pub file: String,
    /// Parameters to check against; inferred from the set when omitted.
    #[arg(long = "type", value_enum)]
    pub kind: Option<SpecKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<i64>,
    /// Excluded elements for --type pps (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a1: Vec<i64>,
    /// Excluded sums/differences for --type pps (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a2: Vec<i64>,
    /// Spec JSON file, instead of --type.
    #[arg(long, conflicts_with = "kind")]
    pub spec_file: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    #[arg(long = "spec", value_enum, default_value = "ps")]
    pub kind: SpecKind,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<i64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a1: Vec<i64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a2: Vec<i64>,
}

#[derive(Subcommand, Debug)]
pub enum SearchCmd {
    /// Orbit-based exact cover search under a multiplier group.
    Km {
        #[arg(long)]
        v: u64,
        #[command(flatten)]
        spec: SpecArgs,
        /// Generators of H; −1 is added. Default H = {1, −1}.
        #[arg(long, value_delimiter = ',')]
        multiplier: Vec<u64>,
        /// Use the CRT-built multiplier suggested for v.
        #[arg(long, conflicts_with = "multiplier")]
        suggest: bool,
        /// Wall-clock budget in seconds.
        #[arg(long, env = "DESIGNFORGE_BUDGET_SECS", default_value_t = 600)]
        budget_secs: u64,
    },
    /// Backtracking over ± classes, for small v.
    Exhaustive {
        #[arg(long)]
        v: u64,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// The (α, β) allowed by the necessary condition, or the reason none exist.
    Admissible {
        #[arg(long)]
        v: u64,
        /// Only report one witness (works past the scan cutoff).
        #[arg(long)]
        witness: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConstructCmd {
    /// APS(p, 1, √2) from powers of 1 + √2, p ≡ 7 (mod 8) prime.
    Silver {
        #[arg(long)]
        p: u64,
    },
    /// APS(p, α, β) for any admissible α, β by scaling the silver set.
    SilverScaled {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        alpha: u64,
        #[arg(long)]
        beta: u64,
    },
    /// PPS over Z_{p²} from powers of 1 + √2.
    SilverSquare {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        alpha: u64,
        /// Defaults to the canonical √2·α.
        #[arg(long)]
        beta: Option<u64>,
    },
    /// Some APS(v): nonexistence check, silver construction, then search.
    Aps {
        #[arg(long)]
        v: u64,
    },
    /// PPS over Z_pq with holes pZ ∪ qZ from quadratic residues, p > q > 3 primes ≡ 3 (mod 4).
    Cyclotomic {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
    },
    /// PS(uv) from a PS(u) and a PS(v).
    Product {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// APS(uv) from a PS(u) and an APS(v).
    Compose {
        #[arg(long)]
        ps: String,
        #[arg(long)]
        aps: String,
    },
    /// The same parameters over Z_{uv}, gcd(u, 6) = 1.
    Inflate {
        #[arg(long)]
        file: String,
        #[arg(long)]
        u: u64,
    },
    /// PPS(pq) from the cyclotomic set with an APS(p) and an APS(q) in its holes.
    Union {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum WhistCmd {
    /// Develop the initial round built from a PS or APS(v, α, α).
    FromPairs {
        #[arg(long)]
        file: String,
        /// α for an APS(v, α, α); inferred when omitted.
        #[arg(long)]
        alpha: Option<u64>,
        #[command(flatten)]
        checks: CheckArgs,
        /// Print the full tournament.
        #[arg(long)]
        rounds: bool,
    },
    /// Check a tournament JSON: {"v": .., "rounds": [[[a, b, c, d], ..], ..]}.
    Verify {
        #[arg(long)]
        file: String,
        #[command(flatten)]
        checks: CheckArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// Check the patterned starter property of round 0.
    #[arg(long)]
    pub zcps: bool,
    /// Also check the directed property.
    #[arg(long)]
    pub directed: bool,
    /// Also check the ordered property.
    #[arg(long)]
    pub ordered: bool,
    /// Count seat adjacencies even for cyclic tournaments.
    #[arg(long)]
    pub force_tally: bool,
}

#[derive(Subcommand, Debug)]
pub enum CdmCmd {
    /// The five-row matrix from a PS(v).
    FromPairs {
        #[arg(long)]
        file: String,
    },
    /// Check a matrix JSON: {"k": .., "v": .., "rows": [[..], ..]}.
    Verify {
        #[arg(long)]
        file: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum OocCmd {
    /// (3v, 4, 1) or (5v, 5, 1) code from a PS or APS.
    Templates {
        #[arg(long)]
        file: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Maximum (45v, 5, 1) code from a PS(v).
    FortyFive {
        #[arg(long)]
        file: String,
    },
    /// Maximal code over Z_{m·pq} from an APS(p) and an APS(q).
    Pq {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Maximal code over Z_{m·p²}.
    PSquared {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Check a code JSON: {"n": .., "k": .., "codewords": [[..], ..]}.
    Verify {
        #[arg(long)]
        file: String,
        /// Also decide maximality (leave of at most 64 residues).
        #[arg(long)]
        maximal: bool,
    },
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    /// Entry to print.
    pub id: Option<String>,
    #[arg(long)]
    pub list: bool,
    /// Re-verify every entry.
    #[arg(long)]
    pub check: bool,
}

/// How a command ended, mapped to the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failed,
    Exhausted,
}

fn main() -> ExitCode {
    // exit quietly when piped into `head` and the like
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match cmd::run(&cli) {
        Ok(Outcome::Success) => ExitCode::from(0),
        Ok(Outcome::Failed) => ExitCode::from(1),
        Ok(Outcome::Exhausted) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            let exhausted = e.downcast_ref::<designforge::Error>().is_some_and(|e| {
                matches!(
                    e,
                    designforge::Error::BudgetExceeded | designforge::Error::NoAps(_)
                )
            });
            ExitCode::from(if exhausted { 3 } else { 2 })
        }
    }
}
