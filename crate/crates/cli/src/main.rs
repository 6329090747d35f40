use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use exsys::basis::SpecialBasis;
use exsys::compat::{check_compat_theorem, transport};
use exsys::degen::{
    connect, diagram_blowups, find_toric_degenerations, pi_circ, pi_circ_divisor, toricdef, ConnectBounds,
    CstarDivisor, DegenerationDiagram, DivisorId,
};
use exsys::noncomm::{emit_quiver, endo_dims, endo_total};
use exsys::system::is_constructible;
use exsys::verify::{self, Report, SCHEMA};
use exsys::{DivisorClass, ToricSurface, ToricSystem};

#[derive(Parser)]
#[command(name = "exsys", version, about = "Exceptional toric systems and degenerations of toric surfaces")]
struct Cli {
    /// Worker threads for the verification suites.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct JsonOut {
    /// Write structured output to this file.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Basis {
    /// Coefficients on the invariant divisors `D_0, ..., D_{n-1}`.
    Ray,
    /// Class coordinates (coefficients on `D_2, ..., D_{n-1}` in the quotient).
    Class,
    /// Coordinates in the special basis `(H, R_1, ...)`.
    Special,
}

#[derive(Subcommand)]
enum Cmd {
    /// Surface data from a b-sequence.
    Surface {
        #[command(subcommand)]
        cmd: SurfaceCmd,
    },
    /// Cohomology of a line bundle.
    Coh {
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        div: String,
        #[arg(long, value_enum, default_value = "ray")]
        basis: Basis,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Toric systems.
    Ts {
        #[arg(value_enum)]
        action: TsAction,
        #[command(flatten)]
        input: TsInput,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Degeneration diagrams.
    Degen {
        #[command(subcommand)]
        cmd: DegenCmd,
    },
    /// Compatibility of toric systems with degenerations.
    Compat {
        #[command(subcommand)]
        cmd: CompatCmd,
    },
    /// Endomorphism algebra data.
    Noncomm {
        #[command(subcommand)]
        cmd: NoncommCmd,
    },
    /// Verification suites.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 3)]
        cbound: i64,
        #[command(flatten)]
        out: JsonOut,
    },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    Info {
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[command(flatten)]
        out: JsonOut,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TsAction {
    Validate,
    Tv,
    Exceptional,
    Constructible,
}

#[derive(Args)]
struct TsInput {
    /// Toric system JSON: {"surface":{"b":[...]},"entries":[[...],...]}.
    #[arg(long, conflicts_with_all = ["b", "entries"])]
    file: Option<PathBuf>,
    #[arg(long, requires = "entries", allow_hyphen_values = true)]
    b: Option<String>,
    /// Entries separated by ';', coordinates by ','.
    #[arg(long, requires = "b", allow_hyphen_values = true)]
    entries: Option<String>,
    #[arg(long, value_enum, default_value = "class")]
    basis: Basis,
}

#[derive(Subcommand)]
enum DegenCmd {
    /// The deformation of a surface with b_0 < 0.
    Toricdef {
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Diagrams with the given general fiber degenerating to the given toric surface.
    Search {
        #[arg(long, allow_hyphen_values = true)]
        special: String,
        #[arg(long, allow_hyphen_values = true)]
        general: String,
        #[arg(long, default_value_t = 6)]
        vbound: i64,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Image of a general-fiber divisor on the special fiber.
    Apply {
        #[arg(long)]
        diagram: PathBuf,
        /// Terms `id=coef` separated by ',', ids '+', '-' or 'label:vertex'.
        #[arg(long, allow_hyphen_values = true)]
        div: String,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Chain of degenerations and deformations between two surfaces of equal rank.
    Connect {
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, default_value_t = 3)]
        bbound: i64,
        #[arg(long, default_value_t = 6)]
        vbound: i64,
        #[command(flatten)]
        out: JsonOut,
    },
}

#[derive(Subcommand)]
enum CompatCmd {
    Check {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        ts: PathBuf,
        /// Also check every augmentation along the blowups of the diagram.
        #[arg(long)]
        augment: bool,
        #[command(flatten)]
        out: JsonOut,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum NoncommCmd {
    Endo {
        /// Optional b-sequence the system must live on.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long)]
        ts: PathBuf,
        #[command(flatten)]
        out: JsonOut,
    },
    Quiver {
        #[arg(long)]
        r: i64,
        #[arg(long)]
        i: i64,
        #[arg(long)]
        alpha: i64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: JsonOut,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Hirzebruch,
    Rank34,
    Example5,
    Tildehirze,
    Isometries,
    Commute,
    Compat,
    Picfour,
}

/// Failure with its exit code.
struct Failure(u8, anyhow::Error);

fn input_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure(2, e.into())
}

fn lib_err(e: exsys::Error) -> Failure {
    let code = if matches!(e, exsys::Error::Internal(_)) { 1 } else { 2 };
    Failure(code, e.into())
}

type Outcome = Result<bool, Failure>;

fn parse_ints(s: &str) -> anyhow::Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().with_context(|| format!("'{t}' is not an integer")))
        .collect()
}

fn surface(b: &str) -> Result<ToricSurface, Failure> {
    ToricSurface::from_b(&parse_ints(b).map_err(input_err)?).map_err(lib_err)
}

/// Reads either the bare value or a CLI output carrying it under `key`.
fn read_json<T: serde::de::DeserializeOwned>(path: &Path, key: &str) -> Result<T, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input_err)?;
    let mut v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(input_err)?;
    if let Some(inner) = v.get_mut(key) {
        v = inner.take();
    }
    serde_json::from_value(v).with_context(|| format!("parsing {}", path.display())).map_err(input_err)
}

fn envelope(kind: &str, data: impl Serialize) -> Value {
    let mut v = serde_json::to_value(data).expect("serializable output");
    match v.as_object_mut() {
        Some(m) => {
            m.insert("schema".into(), json!(SCHEMA));
            m.insert("kind".into(), json!(kind));
            v
        }
        None => json!({"schema": SCHEMA, "kind": kind, "value": v}),
    }
}

fn write_json(out: &JsonOut, v: &Value) -> Result<(), Failure> {
    if let Some(p) = &out.json {
        let text = serde_json::to_string_pretty(v).expect("serializable output");
        fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())).map_err(|e| Failure(2, e))?;
    }
    Ok(())
}

fn class_from(x: &ToricSurface, coords: &[i64], basis: Basis) -> Result<DivisorClass, Failure> {
    let want = match basis {
        Basis::Ray => x.n(),
        _ => x.rank(),
    };
    if coords.len() != want {
        return Err(input_err(anyhow!("expected {want} coordinates, got {}", coords.len())));
    }
    Ok(match basis {
        Basis::Ray => x.class_of(coords),
        Basis::Class => DivisorClass(coords.to_vec()),
        Basis::Special => SpecialBasis::new(x).map_err(lib_err)?.class(coords),
    })
}

fn system_input(input: &TsInput) -> Result<ToricSystem, Failure> {
    if let Some(f) = &input.file {
        return read_json(f, "system");
    }
    let (Some(b), Some(entries)) = (&input.b, &input.entries) else {
        return Err(input_err(anyhow!("give --file, or --b with --entries")));
    };
    let x = surface(b)?;
    let classes = entries
        .split(';')
        .map(|e| class_from(&x, &parse_ints(e).map_err(input_err)?, input.basis))
        .collect::<Result<Vec<_>, _>>()?;
    ToricSystem::validate(&x, classes).map_err(lib_err)
}

fn cmd_surface(b: &str, out: &JsonOut) -> Outcome {
    let x = surface(b)?;
    let rays: Vec<[i64; 2]> = x.rays().iter().map(|r| [r.x, r.y]).collect();
    println!("b-sequence    {:?}", x.b());
    println!("normal form   {:?}", x.normal_form());
    println!("rank          {}", x.rank());
    println!("rays          {rays:?}");
    println!("minus-one     {:?}", x.minus_one_rays());
    println!("K             {:?}", x.canonical_class());
    if let Some(r) = x.hirzebruch_index() {
        println!("Hirzebruch    F_{r}");
    }
    write_json(
        out,
        &envelope(
            "surface",
            json!({
                "surface": x,
                "normal_form": x.normal_form(),
                "rank": x.rank(),
                "rays": rays,
                "minus_one_rays": x.minus_one_rays(),
                "canonical": {"coords": x.canonical_class(), "basis": "hnf"},
                "gram": x.gram(),
            }),
        ),
    )?;
    Ok(true)
}

fn cmd_coh(b: &str, div: &str, basis: Basis, out: &JsonOut) -> Outcome {
    let x = surface(b)?;
    let c = class_from(&x, &parse_ints(div).map_err(input_err)?, basis)?;
    let h = x.cohomology(&c);
    println!("class {:?}: h0 = {}, h1 = {}, h2 = {}, chi = {}", c, h.h0, h.h1, h.h2, x.euler_char(&c));
    write_json(
        out,
        &envelope(
            "cohomology",
            json!({"surface": x, "class": {"coords": c, "basis": "hnf"}, "h0": h.h0, "h1": h.h1, "h2": h.h2}),
        ),
    )?;
    Ok(true)
}

fn cmd_ts(action: TsAction, input: &TsInput, out: &JsonOut) -> Outcome {
    let a = system_input(input)?;
    let (kind, ok, data) = match action {
        TsAction::Validate => {
            println!("valid toric system on {:?}", a.surface());
            ("validate", true, json!({"system": a, "valid": true}))
        }
        TsAction::Tv => {
            let t = a.tv().map_err(lib_err)?;
            let name = t.hirzebruch_index().map(|r| format!(" = F_{r}")).unwrap_or_default();
            println!("TV(A) = {:?}{name}", t);
            ("tv", true, json!({"system": a, "tv": t, "normal_form": t.normal_form()}))
        }
        TsAction::Exceptional => {
            let (e, s) = (a.is_exceptional(), a.is_strongly_exceptional());
            println!("exceptional: {e}, strongly exceptional: {s}");
            ("exceptional", e, json!({"system": a, "exceptional": e, "strongly_exceptional": s}))
        }
        TsAction::Constructible => {
            let (ok, cert) = is_constructible(&a);
            println!("constructible: {ok}");
            println!("{}", serde_json::to_string(&cert).expect("serializable"));
            ("constructible", ok, json!({"system": a, "constructible": ok, "certificate": cert}))
        }
    };
    write_json(out, &envelope(kind, data))?;
    Ok(ok)
}

fn print_diagram(d: &DegenerationDiagram) -> Result<(), Failure> {
    let g = d.general_fiber().map_err(lib_err)?;
    let s = d.special_toric_fiber().map_err(lib_err)?;
    println!("diagram {}", serde_json::to_string(d).expect("serializable"));
    println!("  general fiber {:?}, special fiber {:?}", g.surface.b(), s.surface.b());
    Ok(())
}

fn cmd_degen(cmd: &DegenCmd) -> Outcome {
    match cmd {
        DegenCmd::Toricdef { b, r, out } => {
            let b = parse_ints(b).map_err(input_err)?;
            let td = toricdef(&b, *r).map_err(lib_err)?;
            print_diagram(&td.diagram)?;
            println!("  general b-sequence {:?}", td.general_b);
            write_json(out, &envelope("toricdef", json!({"diagram": td.diagram, "general_b": td.general_b})))?;
            Ok(true)
        }
        DegenCmd::Search { special, general, vbound, out } => {
            let (x0, xs) = (surface(special)?, surface(general)?);
            let found = find_toric_degenerations(&xs, &x0, *vbound);
            println!("{} diagrams", found.len());
            for d in &found {
                print_diagram(d)?;
            }
            write_json(out, &envelope("search", json!({"diagrams": found})))?;
            Ok(!found.is_empty())
        }
        DegenCmd::Apply { diagram, div, out } => {
            let d: DegenerationDiagram = read_json(diagram, "diagram")?;
            let mut dv = CstarDivisor::new();
            for term in div.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (id, c) = term.rsplit_once('=').unwrap_or((term, "1"));
                let id: DivisorId = id.parse().map_err(lib_err)?;
                let c: i64 = c.trim().parse().with_context(|| format!("bad coefficient in '{term}'")).map_err(input_err)?;
                *dv.entry(id).or_insert(0) += c;
            }
            let pi = pi_circ(&d).map_err(lib_err)?;
            let img = pi_circ_divisor(&d, &dv).map_err(lib_err)?;
            let (gc, sc) = (pi.general.class_of(&dv).map_err(lib_err)?, pi.special.class_of(&img).map_err(lib_err)?);
            let show = |m: &CstarDivisor| m.iter().map(|(k, v)| format!("{v}*[{k}]")).collect::<Vec<_>>().join(" + ");
            println!("{}  ->  {}", show(&dv), show(&img));
            println!("class {:?} on {:?}  ->  {:?} on {:?}", gc, pi.general.surface, sc, pi.special.surface);
            write_json(
                out,
                &envelope(
                    "apply",
                    json!({
                        "divisor": dv,
                        "image": img,
                        "general": {"surface": pi.general.surface, "class": gc},
                        "special": {"surface": pi.special.surface, "class": sc},
                        "matrix": pi.matrix,
                    }),
                ),
            )?;
            Ok(true)
        }
        DegenCmd::Connect { from, to, bbound, vbound, out } => {
            let (x, y) = (surface(from)?, surface(to)?);
            let c = connect(&x, &y, ConnectBounds { bbound: *bbound, vbound: *vbound }).map_err(lib_err)?;
            for s in &c.steps {
                println!("{:?} -> {:?} ({:?})", s.from, s.to, s.direction);
            }
            println!("composite {:?}", c.matrix);
            write_json(out, &envelope("connect", &c))?;
            Ok(true)
        }
    }
}

fn cmd_compat(diagram: &Path, ts: &Path, augment: bool, out: &JsonOut) -> Outcome {
    let d: DegenerationDiagram = read_json(diagram, "diagram")?;
    let a: ToricSystem = read_json(ts, "system")?;
    let general = d.general_fiber().map_err(lib_err)?.surface;
    let a = match a.surface().relabeling_to(&general) {
        Some(p) if a.surface().b() != general.b() => a.transfer(&general, &p).map_err(lib_err)?,
        _ => a,
    };
    if !is_constructible(&a).0 {
        return Err(lib_err(exsys::Error::Precondition("compatibility is defined for constructible systems".into())));
    }
    let mut corpus = vec![(d.clone(), a.clone())];
    if augment {
        for bu in diagram_blowups(&d).map_err(lib_err)? {
            for i in 0..a.n() {
                if let Ok(aug) = a.augment(&bu.general, i) {
                    corpus.push((bu.fine.clone(), aug));
                }
            }
        }
    }
    let report = check_compat_theorem(&corpus).map_err(lib_err)?;
    for p in &report.pairs {
        println!("{:?} {:?}: compatible {}, image constructible {}", p.general_b, p.entries, p.compatible, p.image_constructible);
    }
    let image = transport(&a, &d).map_err(lib_err)?;
    println!("image of the input system: {:?}", image.entries());
    write_json(out, &envelope("compat", json!({"image": image, "report": report})))?;
    Ok(report.discrepancies.is_empty())
}

fn cmd_noncomm(cmd: &NoncommCmd) -> Outcome {
    match cmd {
        NoncommCmd::Endo { b, ts, out } => {
            let a: ToricSystem = read_json(ts, "system")?;
            if let Some(b) = b {
                if surface(b)?.b() != a.surface().b() {
                    return Err(input_err(anyhow!("system lives on {:?}, not {b}", a.surface())));
                }
            }
            let d = endo_dims(&a).map_err(lib_err)?;
            for e in &d {
                println!("h0(A_{} + ... + A_{}) = {}", e.j, e.k, e.dim);
            }
            let total = endo_total(&a, &d);
            println!("total dimension {total}");
            write_json(out, &envelope("endo", json!({"system": a, "blocks": d, "total": total})))?;
            Ok(true)
        }
        NoncommCmd::Quiver { r, i, alpha, format, out } => {
            let q = emit_quiver(*r, *i, *alpha).map_err(lib_err)?;
            match format {
                Format::Dot => print!("{}", q.to_dot()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&envelope("quiver", &q)).expect("serializable")),
            }
            write_json(out, &envelope("quiver", &q))?;
            Ok(true)
        }
    }
}

fn print_report(r: &Report) {
    for c in &r.checks {
        let tag = match (c.pass, &c.conflict) {
            (true, _) => "PASS",
            (false, Some(_)) => "CONFLICT",
            (false, None) => "FAIL",
        };
        let mut line = format!("{tag:8} {}", c.name);
        if !c.detail.is_empty() {
            line.push_str(&format!(": {}", c.detail));
        }
        if let Some(k) = &c.conflict {
            line.push_str(&format!(" (computed: {k})"));
        }
        println!("{line}");
    }
    println!("{}: {}", r.suite, if r.pass { "pass" } else { "fail" });
}

fn cmd_verify(suite: Suite, cbound: i64, out: &JsonOut) -> Outcome {
    if cbound < 0 {
        return Err(input_err(anyhow!("cbound must be nonnegative")));
    }
    let report = match suite {
        Suite::Hirzebruch => verify::verify_hirzebruch(4, 4),
        Suite::Rank34 => verify::verify_rank34(cbound).0,
        Suite::Example5 => verify::verify_example5(),
        Suite::Tildehirze => verify::verify_tildehirze(3, 6).0,
        Suite::Isometries => verify::verify_isometries(),
        Suite::Commute => verify::verify_commute(3, 2, 3),
        Suite::Compat => verify::verify_compat(3, 2, 3),
        Suite::Picfour => verify::verify_picfour(3, 6).0,
    };
    print_report(&report);
    if let Some(p) = &out.json {
        let text = serde_json::to_string_pretty(&report).expect("serializable");
        fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())).map_err(|e| Failure(2, e))?;
    }
    Ok(report.pass)
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(input_err(anyhow!("--jobs must be positive")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(input_err)?;
    }
    match &cli.cmd {
        Cmd::Surface { cmd: SurfaceCmd::Info { b, out } } => cmd_surface(b, out),
        Cmd::Coh { b, div, basis, out } => cmd_coh(b, div, *basis, out),
        Cmd::Ts { action, input, out } => cmd_ts(*action, input, out),
        Cmd::Degen { cmd } => cmd_degen(cmd),
        Cmd::Compat { cmd: CompatCmd::Check { diagram, ts, augment, out } } => cmd_compat(diagram, ts, *augment, out),
        Cmd::Noncomm { cmd } => cmd_noncomm(cmd),
        Cmd::Verify { suite, cbound, out } => cmd_verify(*suite, *cbound, out),
    }
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe, e.g. `exsys ... | head`.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
