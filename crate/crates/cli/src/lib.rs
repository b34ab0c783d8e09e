//! The `linspace` command line.

pub mod format;

use std::io::{Read, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use linspace::amalgam::{
    amalgamate_in_class, free_amalgam, incompatible_planarisations, verify_certificate,
    verify_class_ap, IncompatiblePair,
};
use linspace::enumerate::{classify_homogeneous, enumerate_levels, ClassSpec};
use linspace::game::{play_and_analyse, strategy_by_name, DEFAULT_PROBE_SIZE};
use linspace::morphisms::{
    automorphisms_with, count_embeddings, extend_to_automorphism_with, find_embeddings_with,
    is_homogeneous_with,
};
use linspace::planarise::{
    concurrent_planarisation, planar_closure, projective_completion_with, trivial_planarisation,
    DEFAULT_COMPLETION_POINT_BUDGET,
};
use linspace::{
    is_isomorphic, named, nonhomogeneity_witness_deg5, projective_plane, Line, LinearSpace,
    SearchConfig,
};

use format::{parse_space, render, report, Format};

/// Overrides the default node budget of the morphism searches.
pub const BUDGET_ENV: &str = "LINSPACE_SEARCH_BUDGET";

#[derive(Parser, Debug)]
#[command(
    name = "linspace",
    version,
    about = "Finite linear spaces and projective planes"
)]
struct Cli {
    /// Emit a versioned JSON report instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for long verifications.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

/// Space arguments are file paths, `-` for standard input, or a built-in
/// name: `@fano`, `@pentagon`, `@quadrilateral`, `@triangle`, `@pg:Q`,
/// `@line:N`, `@near-pencil:N`, `@trivial:N`.
#[derive(Subcommand, Debug)]
enum Command {
    /// Check a space file against the axioms.
    Validate { space: String },
    /// Shape, degree and counts.
    Info { space: String },
    /// The projective plane PG(2, q).
    Pg {
        q: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Isomorphism test.
    Iso { a: String, b: String },
    /// Embeddings of one space into another.
    Embed {
        a: String,
        b: String,
        #[arg(long, default_value_t = 1)]
        limit: usize,
        /// Count all embeddings instead of listing.
        #[arg(long)]
        count: bool,
    },
    /// Automorphism group.
    Aut {
        space: String,
        #[arg(long)]
        list: bool,
    },
    /// Homogeneity by complete search.
    Homog { space: String },
    /// The six-point non-extendable partial isomorphism of a plane of degree at least 5.
    WitnessDeg5 { space: String },
    /// Planar closure of a point set.
    Closure {
        space: String,
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<usize>,
    },
    /// Truncated projective completion.
    Complete {
        space: String,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long, default_value_t = DEFAULT_COMPLETION_POINT_BUDGET)]
        budget: usize,
        /// Write the final space here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Trivial planarisation on parallel pairs, or a concurrent one.
    Planarise {
        space: String,
        /// A pair `0,1:2,3` of parallel lines; repeatable.
        #[arg(long)]
        pairs: Vec<String>,
        /// Pairwise parallel lines `0,1:2,3:4,5`.
        #[arg(long, conflicts_with = "pairs")]
        concurrent: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Amalgam of two extensions of a base.
    Amalgamate {
        a: String,
        b1: String,
        b2: String,
        /// Free amalgam over prefix embeddings (the default).
        #[arg(long)]
        free: bool,
        /// Amalgam of one-point extensions inside a class.
        #[arg(long, conflicts_with = "free")]
        in_class: Option<String>,
        /// Embedding of the base into b1 as comma-separated images.
        #[arg(long, value_delimiter = ',')]
        f1: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        f2: Option<Vec<usize>>,
    },
    /// Two planarisations with no amalgam, with a certificate.
    Incompatible { space: String },
    /// Check a certificate as written by `incompatible --json`.
    VerifyCert { file: String },
    /// Amalgamation over all small members of a class.
    Ap {
        #[arg(long, default_value = "d3")]
        class: String,
        #[arg(long, default_value_t = 7)]
        max_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Isomorph-free generation.
    Enumerate {
        #[arg(long)]
        points: usize,
        #[arg(long, default_value = "all")]
        filter: String,
        /// Print every space on exactly `--points` points.
        #[arg(long)]
        list: bool,
    },
    /// Homogeneity of every space up to a size.
    Classify {
        #[arg(long, default_value_t = 7)]
        max_points: usize,
    },
    /// Play the extension game.
    Game {
        #[arg(long, default_value = "@quadrilateral")]
        start: String,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value = "closure_strategy")]
        strategy_a: String,
        #[arg(long, default_value = "closure_strategy")]
        strategy_b: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_PROBE_SIZE)]
        probe: usize,
    },
    /// Dual incidence structure.
    Dual {
        space: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Rewrite a space in another format.
    Convert {
        space: String,
        #[arg(long, value_enum, default_value = "json")]
        to: Format,
    },
}

/// Usage problems found after argument parsing; exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{flag}: {message}")]
pub struct UsageError {
    pub flag: String,
    pub message: String,
}

fn usage(flag: &str, message: impl Into<String>) -> anyhow::Error {
    UsageError {
        flag: flag.to_string(),
        message: message.into(),
    }
    .into()
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
    jobs: usize,
    search: SearchConfig,
}

/// Runs the command line; returns the exit code.
pub fn run<I, S>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let mut search = SearchConfig::default();
    if let Ok(v) = std::env::var(BUDGET_ENV) {
        match v.parse() {
            Ok(b) => search.node_budget = b,
            Err(_) => {
                let _ = writeln!(stderr, "error: {BUDGET_ENV}: not a number: {v:?}");
                return 2;
            }
        }
    }
    let mut io = Io {
        stdin,
        out: stdout,
        err: stderr,
        json: cli.json,
        jobs: cli.jobs,
        search,
    };
    match dispatch(cli.command, &mut io) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

impl Io<'_> {
    fn load(&mut self, arg: &str) -> Result<LinearSpace> {
        if let Some(name) = arg.strip_prefix('@') {
            return named_space(name);
        }
        let text = if arg == "-" {
            let mut s = String::new();
            self.stdin
                .read_to_string(&mut s)
                .context("reading standard input")?;
            s
        } else {
            std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
        };
        Ok(parse_space(&text)
            .with_context(|| format!("parsing {arg}"))?
            .0)
    }

    fn emit<T: Serialize>(
        &mut self,
        command: &str,
        value: &T,
        table: impl FnOnce() -> String,
    ) -> Result<()> {
        let text = if self.json {
            report(command, value)
        } else {
            table()
        };
        self.out.write_all(text.as_bytes())?;
        Ok(())
    }

    fn space_out(&mut self, command: &str, s: &LinearSpace, f: Format) -> Result<()> {
        let text = if self.json {
            report(command, s)
        } else {
            render(s, f)
        };
        self.out.write_all(text.as_bytes())?;
        Ok(())
    }
}

fn named_space(name: &str) -> Result<LinearSpace> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (
            h,
            Some(
                a.parse::<usize>()
                    .map_err(|_| usage("space", format!("bad size in @{name}")))?,
            ),
        ),
        None => (name, None),
    };
    Ok(match (head, arg) {
        ("fano", None) => named::fano(),
        ("pentagon", None) => named::pentagon(),
        ("quadrilateral", None) => named::quadrilateral(),
        ("triangle", None) => named::triangle(),
        ("pg", Some(q)) => projective_plane(q)?,
        ("line", Some(n)) => named::line(n),
        ("near-pencil", Some(n)) if n >= 3 => named::near_pencil(n),
        ("trivial", Some(n)) => LinearSpace::trivial(n),
        _ => return Err(usage("space", format!("unknown built-in space @{name}"))),
    })
}

fn parse_line(flag: &str, s: &str) -> Result<Line> {
    let mut l: Line = s
        .split(',')
        .map(|w| {
            w.trim()
                .parse()
                .map_err(|_| usage(flag, format!("not a point list: {s:?}")))
        })
        .collect::<Result<_>>()?;
    l.sort_unstable();
    Ok(l)
}

fn parse_lines(flag: &str, s: &str) -> Result<Vec<Line>> {
    s.split(':').map(|l| parse_line(flag, l)).collect()
}

fn fmt_line(l: &[usize]) -> String {
    l.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn fmt_images(img: &[usize]) -> String {
    img.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn dispatch(cmd: Command, io: &mut Io<'_>) -> Result<()> {
    match cmd {
        Command::Validate { space } => {
            let s = io.load(&space)?;
            let v = json!({"valid": true, "points": s.n_points(), "lines": s.line_count()});
            io.emit("validate", &v, || {
                format!("valid: {} points, {} lines\n", s.n_points(), s.line_count())
            })
        }
        Command::Info { space } => {
            let s = io.load(&space)?;
            let r = s.classify_shape();
            io.emit("info", &r, || {
                let mut t = String::new();
                t += &format!("points: {}\n", r.n_points);
                t += &format!("lines: {}\n", r.n_lines);
                t += &format!("degree: {}\n", r.degree);
                if let Some(q) = r.order {
                    t += &format!("order: {q}\n");
                }
                for (k, v) in [
                    ("trivial", r.is_trivial),
                    ("line", r.is_line),
                    ("near-pencil", r.is_near_pencil),
                    ("pentagon", r.is_pentagon),
                    ("degenerate", r.is_degenerate),
                    ("closed", r.is_closed),
                    ("projective plane", r.is_projective_plane),
                ] {
                    t += &format!("{k}: {v}\n");
                }
                t
            })
        }
        Command::Pg { q, format } => {
            let s = projective_plane(q)?;
            io.space_out("pg", &s, format)
        }
        Command::Iso { a, b } => {
            let (a, b) = (io.load(&a)?, io.load(&b)?);
            let m = is_isomorphic(&a, &b);
            io.emit(
                "iso",
                &json!({"isomorphic": m.is_some(), "map": m}),
                || match &m {
                    Some(img) => format!("isomorphic: true\nmap: {}\n", fmt_images(img)),
                    None => "isomorphic: false\n".into(),
                },
            )
        }
        Command::Embed { a, b, limit, count } => {
            let (a, b) = (io.load(&a)?, io.load(&b)?);
            if count {
                let c = count_embeddings(&a, &b, &io.search)?;
                return io.emit("embed", &json!({"count": c}), || {
                    format!("embeddings: {c}\n")
                });
            }
            let es = find_embeddings_with(&a, &b, limit, &[], &io.search)?;
            io.emit("embed", &json!({"embeddings": es}), || {
                let mut t = format!("embeddings found: {}\n", es.len());
                for e in &es {
                    t += &format!("{}\n", fmt_images(e));
                }
                t
            })
        }
        Command::Aut { space, list } => {
            let s = io.load(&space)?;
            let g = automorphisms_with(&s, &io.search)?;
            let v = if list {
                json!({"order": g.len(), "automorphisms": g})
            } else {
                json!({"order": g.len()})
            };
            io.emit("aut", &v, || {
                let mut t = format!("automorphisms: {}\n", g.len());
                if list {
                    for p in &g {
                        t += &format!("{}\n", fmt_images(p));
                    }
                }
                t
            })
        }
        Command::Homog { space } => {
            let s = io.load(&space)?;
            let r = is_homogeneous_with(&s, &io.search)?;
            io.emit("homog", &r, || {
                let mut t = format!("homogeneous: {}\n", r.homogeneous);
                t += &format!("automorphisms: {}\n", r.automorphism_count);
                t += &format!("domains checked: {}\n", r.domains_checked);
                if let Some(w) = &r.witness {
                    t += &format!("witness: {w}\n");
                }
                t
            })
        }
        Command::WitnessDeg5 { space } => {
            let s = io.load(&space)?;
            let w = nonhomogeneity_witness_deg5(&s)?;
            let ext = extend_to_automorphism_with(&s, &w.map, &io.search)?;
            let v = json!({"witness": w, "extends": ext.is_some()});
            io.emit("witness-deg5", &v, || {
                format!(
                    "horizon: {}\ns: {}\nt: {}\ny: {}\nmap: {}\nextends to automorphism: {}\n",
                    fmt_line(&w.horizon),
                    w.s,
                    w.t,
                    w.y,
                    w.map,
                    ext.is_some()
                )
            })
        }
        Command::Closure { space, points } => {
            let s = io.load(&space)?;
            let c = planar_closure(&points, &s)?;
            io.emit("closure", &json!({"closure": c, "size": c.len()}), || {
                format!("closure ({} points): {}\n", c.len(), fmt_line(&c))
            })
        }
        Command::Complete {
            space,
            rounds,
            budget,
            output,
        } => {
            let s = io.load(&space)?;
            let mut progress = Vec::new();
            let c = projective_completion_with(&s, rounds, budget, &mut |r, x| {
                progress.push(format!("round {r}: {} points", x.n_points()));
            })?;
            if let Some(path) = &output {
                std::fs::write(path, format::to_text(&c.space))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let summary = json!({
                "closed": c.closed,
                "rounds_used": c.rounds_used,
                "free_points_added": c.free_points_added,
                "rounds": c.rounds,
            });
            io.emit("complete", &summary, || {
                let mut t = format!("free points added: {}\n", c.free_points_added);
                t += "round  points  lines  parallel-pairs\n";
                for (i, r) in c.rounds.iter().enumerate() {
                    t += &format!(
                        "{i:>5}  {:>6}  {:>5}  {:>14}\n",
                        r.points, r.lines, r.parallel_pairs
                    );
                }
                t += &format!("projective plane: {}\n", c.closed);
                t
            })
        }
        Command::Planarise {
            space,
            pairs,
            concurrent,
            format,
        } => {
            let s = io.load(&space)?;
            let b = if let Some(c) = concurrent {
                concurrent_planarisation(&s, &parse_lines("--concurrent", &c)?)?
            } else {
                if pairs.is_empty() {
                    return Err(usage("--pairs", "give --pairs or --concurrent"));
                }
                let ps = pairs
                    .iter()
                    .map(|p| match parse_lines("--pairs", p)?.as_slice() {
                        [x, y] => Ok((x.clone(), y.clone())),
                        _ => Err(usage("--pairs", format!("expected two lines in {p:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                trivial_planarisation(&s, &ps)?
            };
            io.space_out("planarise", &b, format)
        }
        Command::Amalgamate {
            a,
            b1,
            b2,
            free: _,
            in_class,
            f1,
            f2,
        } => {
            let (a, b1, b2) = (io.load(&a)?, io.load(&b1)?, io.load(&b2)?);
            let id: Vec<usize> = (0..a.n_points()).collect();
            let (am, how) = match in_class {
                Some(c) => {
                    if f1.is_some() || f2.is_some() {
                        return Err(usage(
                            "--in-class",
                            "embeddings are the prefix inclusions here",
                        ));
                    }
                    let class =
                        ClassSpec::parse(&c).map_err(|e| usage("--in-class", e.to_string()))?;
                    match amalgamate_in_class(&a, &b1, &b2, &class)? {
                        Some(r) => (r.amalgam, format!("{:?}", r.how)),
                        None => bail!("no amalgam in class {class}"),
                    }
                }
                None => {
                    let f1 = f1.unwrap_or_else(|| id.clone());
                    let f2 = f2.unwrap_or_else(|| id.clone());
                    (free_amalgam(&a, &b1, &b2, &f1, &f2)?, "FreeAmalgam".into())
                }
            };
            io.emit("amalgamate", &json!({"amalgam": am, "move": how}), || {
                format!(
                    "move: {how}\ne1: {}\ne2: {}\n{}",
                    fmt_images(&am.e1),
                    fmt_images(&am.e2),
                    format::to_text(&am.c)
                )
            })
        }
        Command::Incompatible { space } => {
            let s = io.load(&space)?;
            let p = incompatible_planarisations(&s)?;
            let ok = verify_certificate(&p.cert, &s, &p.b1, &p.b2);
            io.emit("incompatible", &p, || {
                let c = &p.cert;
                format!(
                    "case: {}\nchain steps: {}\nl1: {}\nl2: {}\nl3: {}\na': {} (b1 has {} points)\na'': {} (b2 has {} points)\noff l3 with: {} {}\ncertificate verifies: {ok}\n",
                    c.case,
                    c.chain.steps.len(),
                    fmt_line(&c.l1),
                    fmt_line(&c.l2),
                    fmt_line(&c.l3),
                    c.a_prime,
                    p.b1.n_points(),
                    c.a_dblprime,
                    p.b2.n_points(),
                    c.noncollinear_with.0,
                    c.noncollinear_with.1,
                )
            })
        }
        Command::VerifyCert { file } => {
            let text = if file == "-" {
                let mut s = String::new();
                io.stdin.read_to_string(&mut s)?;
                s
            } else {
                std::fs::read_to_string(&file).with_context(|| format!("reading {file}"))?
            };
            let mut v: serde_json::Value =
                serde_json::from_str(&text).context("parsing certificate")?;
            if let Some(r) = v.get_mut("result") {
                v = r.take();
            }
            let p: IncompatiblePair = serde_json::from_value(v).context("parsing certificate")?;
            let ok = verify_certificate(&p.cert, &p.cert.chain.base, &p.b1, &p.b2);
            io.emit("verify-cert", &json!({"verified": ok}), || {
                format!("verified: {ok}\n")
            })?;
            if ok {
                Ok(())
            } else {
                Err(anyhow!("certificate does not verify"))
            }
        }
        Command::Ap {
            class,
            max_points,
            seed,
        } => {
            let class = ClassSpec::parse(&class).map_err(|e| usage("--class", e.to_string()))?;
            let r = verify_class_ap(&class, max_points, io.jobs, seed)?;
            io.emit("ap", &r, || {
                let mut t = format!("class: {}\nmax points: {}\n", r.class, r.max_points);
                t += &format!("bases: {}\n", r.bases);
                t += &format!("one-point instances: {}\n", r.instances);
                t += &format!("multi-point instances: {}\n", r.multi_point_instances);
                for (m, k) in &r.moves {
                    t += &format!("  {m}: {k}\n");
                }
                t += &format!("inconclusive: {}\n", r.inconclusive);
                t += &format!("failures: {}\n", r.failures.len());
                for f in &r.failures {
                    t += &format!(
                        "  {} over a base on {} points: extensions on {} and {} points\n",
                        f.kind,
                        f.base.n_points(),
                        f.b1.n_points(),
                        f.b2.n_points()
                    );
                }
                t
            })
        }
        Command::Enumerate {
            points,
            filter,
            list,
        } => {
            let class = ClassSpec::parse(&filter).map_err(|e| usage("--filter", e.to_string()))?;
            let levels = enumerate_levels(points, &class)?;
            let counts: Vec<usize> = levels.iter().map(Vec::len).collect();
            let last = levels.last().cloned().unwrap_or_default();
            let v = if list {
                json!({"class": class.name(), "counts": counts, "spaces": last})
            } else {
                json!({"class": class.name(), "counts": counts})
            };
            io.emit("enumerate", &v, || {
                let mut t = format!("class: {}\npoints  spaces\n", class.name());
                for (n, c) in counts.iter().enumerate() {
                    t += &format!("{n:>6}  {c:>6}\n");
                }
                if list {
                    for s in &last {
                        t += "\n";
                        t += &format::to_text(s);
                    }
                }
                t
            })
        }
        Command::Classify { max_points } => {
            let cs = classify_homogeneous(max_points)?;
            io.emit("classify", &cs, || {
                let mut t = String::from("points  lines  homogeneous  tag    witness\n");
                for c in &cs {
                    let tag = c.tag.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
                    let w = c
                        .witness
                        .as_ref()
                        .map(|w| w.to_string())
                        .unwrap_or_else(|| "-".into());
                    t += &format!(
                        "{:>6}  {:>5}  {:>11}  {tag:<5}  {w}\n",
                        c.space.n_points(),
                        c.space.line_count(),
                        c.homogeneous
                    );
                }
                t
            })
        }
        Command::Game {
            start,
            rounds,
            strategy_a,
            strategy_b,
            seed,
            probe,
        } => {
            let s = io.load(&start)?;
            let a =
                strategy_by_name(&strategy_a).map_err(|e| usage("--strategy-a", e.to_string()))?;
            let b =
                strategy_by_name(&strategy_b).map_err(|e| usage("--strategy-b", e.to_string()))?;
            let r = play_and_analyse(s, a.as_ref(), b.as_ref(), rounds, seed, probe)?;
            io.emit("game", &r, || {
                let mut t = String::from(
                    "round  player            points  lines  degree  parallel-pairs\n",
                );
                for x in &r.rounds {
                    t += &format!(
                        "{:>5}  {:<16}  {:>6}  {:>5}  {:>6}  {:>14}\n",
                        x.round,
                        x.player.as_deref().unwrap_or("-"),
                        x.points,
                        x.lines,
                        x.degree,
                        x.parallel_pairs
                    );
                }
                let open = r.pairs.iter().filter(|p| p.resolved_at.is_none()).count();
                t += &format!("pairs seen: {}, unresolved: {open}\n", r.pairs.len());
                let p = &r.probe;
                t += &format!(
                    "subsets of <= {} points with closed closure: {}/{}\n",
                    p.k, p.closed_closures, p.subsets
                );
                t += &format!("final space closed: {}\n", p.final_closed);
                t
            })
        }
        Command::Dual { space, format } => {
            let s = io.load(&space)?;
            let d = s.dual()?;
            io.space_out("dual", &d, format)
        }
        Command::Convert { space, to } => {
            let s = io.load(&space)?;
            io.out.write_all(render(&s, to).as_bytes())?;
            Ok(())
        }
    }
}
