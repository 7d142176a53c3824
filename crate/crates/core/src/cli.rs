//! Script runner, golden-corpus checker and REPL.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::Interpreter;
use crate::lang::parse_program;
use crate::value::Value;

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Print the desugared program instead of evaluating it.
    pub dump_desugared: bool,
    /// When non-empty, scalars are printed as floats with these symbols bound.
    pub bindings: HashMap<String, f64>,
    pub precision: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dump_desugared: false,
            bindings: HashMap::new(),
            precision: 12,
        }
    }
}

/// Parse `sym=float`.
pub fn parse_binding(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected sym=value, got `{s}`"))?;
    let x: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    Ok((name.trim().to_string(), x))
}

pub fn format_value(v: &Value, config: &RunConfig) -> Result<String> {
    if config.bindings.is_empty() {
        Ok(v.to_string())
    } else {
        v.display_numeric(&config.bindings, config.precision)
    }
}

pub fn diagnostic(e: &Error, origin: &str) -> String {
    format!("error[{}]: {origin}:{e}", e.class())
}

/// Evaluate `text`, writing one line per non-definition form.
pub fn run_source(interp: &Interpreter, text: &str, config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let forms = parse_program(text)?;
    if config.dump_desugared {
        for f in &forms {
            let _ = writeln!(out, "{f}");
        }
        return Ok(());
    }
    for form in &forms {
        if let Some(v) = interp.run_form(form)? {
            let _ = writeln!(out, "{}", format_value(&v, config)?);
        }
    }
    Ok(())
}

/// Run a script file; returns the process exit code.
pub fn run_script(path: &Path, config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error[io]: {}: {e}", path.display());
            return 2;
        }
    };
    let interp = Interpreter::new();
    match run_source(&interp, &text, config, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", diagnostic(&e, &path.display().to_string()));
            1
        }
    }
}

/// Expected outputs of a golden file: every `;=>` comment, in order.
/// An empty annotation is returned as `None`.
pub fn annotations(text: &str) -> Vec<Option<String>> {
    text.lines()
        .filter_map(|l| l.trim_start().strip_prefix(";=>"))
        .map(|rest| {
            let rest = rest.trim();
            (!rest.is_empty()).then(|| rest.to_string())
        })
        .collect()
}

/// Printed outputs of a golden file. A failing form prints `error[class]`
/// and evaluation continues with the next form.
pub fn golden_outputs(text: &str) -> Result<Vec<String>> {
    let interp = Interpreter::new();
    let config = RunConfig::default();
    let mut out = Vec::new();
    for form in parse_program(text)? {
        match interp.run_form(&form) {
            Ok(Some(v)) => out.push(format_value(&v, &config)?),
            Ok(None) => {}
            Err(e) => out.push(format!("error[{}]", e.class())),
        }
    }
    Ok(out)
}

/// Compare one golden file; `Err` lists the problems.
pub fn check_file(path: &Path) -> std::result::Result<usize, Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| vec![format!("cannot read: {e}")])?;
    let expected = annotations(&text);
    let actual = golden_outputs(&text).map_err(|e| vec![diagnostic(&e, &path.display().to_string())])?;
    let mut problems = Vec::new();
    for (n, want) in expected.iter().enumerate() {
        match (want, actual.get(n)) {
            (None, _) => problems.push(format!("annotation {} is empty", n + 1)),
            (Some(w), Some(a)) if w == a => {}
            (Some(w), Some(a)) => problems.push(format!("output {}: expected `{w}`, got `{a}`", n + 1)),
            (Some(w), None) => problems.push(format!("output {}: expected `{w}`, got nothing", n + 1)),
        }
    }
    for (n, a) in actual.iter().enumerate().skip(expected.len()) {
        problems.push(format!("output {}: unannotated `{a}`", n + 1));
    }
    if problems.is_empty() {
        Ok(expected.len())
    } else {
        Err(problems)
    }
}

pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tegi"))
        .collect();
    files.sort();
    Ok(files)
}

/// Check every `.tegi` file in `dir`; exit code 0 iff all pass.
pub fn check_corpus(dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let files = match corpus_files(dir) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error[io]: {}: {e}", dir.display());
            return 2;
        }
    };
    if files.is_empty() {
        let _ = writeln!(err, "warning: no .tegi files in {}", dir.display());
        return 0;
    }
    let mut failed = 0;
    for f in &files {
        match check_file(f) {
            Ok(n) => {
                let _ = writeln!(out, "PASS {} ({n} outputs)", f.display());
            }
            Err(problems) => {
                failed += 1;
                let _ = writeln!(out, "FAIL {}", f.display());
                for p in problems {
                    let _ = writeln!(out, "  {p}");
                }
            }
        }
    }
    let _ = writeln!(out, "{} passed, {failed} failed", files.len() - failed);
    i32::from(failed > 0)
}

/// Open brackets not yet closed, ignoring strings and comments.
fn open_depth(text: &str) -> i64 {
    let mut depth = 0;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' => {
                let mut closed = false;
                while let Some(c) = chars.next() {
                    match c {
                        '\\' => {
                            chars.next();
                        }
                        '"' => {
                            closed = true;
                            break;
                        }
                        _ => {}
                    }
                }
                if !closed {
                    return depth + 1;
                }
            }
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ => {}
        }
    }
    depth
}

/// Interactive loop over `input`. Values print exactly as `run` prints them.
pub fn run_repl(input: &mut dyn BufRead, out: &mut dyn Write, config: &RunConfig) -> i32 {
    let interp = Interpreter::new();
    let mut buffer = String::new();
    loop {
        let _ = write!(out, "{}", if buffer.is_empty() { "> " } else { ". " });
        let _ = out.flush();
        let mut line = String::new();
        match input.read_line(&mut line) {
            Ok(0) | Err(_) => {
                let _ = writeln!(out);
                return 0;
            }
            Ok(_) => {}
        }
        if buffer.is_empty() {
            let cmd = line.trim();
            if cmd == ":quit" || cmd == ":q" {
                return 0;
            }
            if cmd == ":env" {
                let _ = writeln!(out, "{}", interp.global().names().join(" "));
                continue;
            }
            if let Some(file) = cmd.strip_prefix(":load") {
                let file = file.trim();
                match fs::read_to_string(file) {
                    Ok(text) => {
                        if let Err(e) = run_source(&interp, &text, config, out) {
                            let _ = writeln!(out, "{}", diagnostic(&e, file));
                        }
                    }
                    Err(e) => {
                        let _ = writeln!(out, "error[io]: {file}: {e}");
                    }
                }
                continue;
            }
        }
        buffer.push_str(&line);
        if open_depth(&buffer) > 0 {
            continue;
        }
        let text = std::mem::take(&mut buffer);
        if let Err(e) = run_source(&interp, &text, config, out) {
            let _ = writeln!(out, "{}", diagnostic(&e, "<repl>"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bindings_parse() {
        assert_eq!(parse_binding("θ=0.7"), Ok(("θ".to_string(), 0.7)));
        assert!(parse_binding("θ").is_err());
        assert!(parse_binding("θ=x").is_err());
    }

    #[test]
    fn runs_and_prints_values() {
        let mut out = Vec::new();
        let interp = Interpreter::new();
        run_source(&interp, "(define $a 3) (contract + [|11 22 33|]~_i) a", &RunConfig::default(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "66\n3\n");
    }

    #[test]
    fn numeric_printing() {
        let mut cfg = RunConfig::default();
        cfg.bindings.insert("θ".into(), 0.7);
        cfg.precision = 6;
        let mut out = Vec::new();
        run_source(&Interpreter::new(), "(/ (cos θ) (sin θ))", &cfg, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1.187242\n");
    }

    #[test]
    fn dump_desugared() {
        let cfg = RunConfig {
            dump_desugared: true,
            ..RunConfig::default()
        };
        let mut out = Vec::new();
        run_source(&Interpreter::new(), "(define $Γ_i_j_k E)", &cfg, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "(define $Γ___ (with-symbols {i j k} (transpose {i j k} E)))\n"
        );
    }

    #[test]
    fn annotation_extraction() {
        let a = annotations("(+ 1 2)\n;=> 3\n  ;=>   \n; plain comment\n");
        assert_eq!(a, vec![Some("3".to_string()), None]);
    }

    #[test]
    fn golden_errors_are_outputs() {
        let out = golden_outputs("[|1 2|]_i_j_k\n(+ 1 2)").unwrap();
        assert_eq!(out, vec!["error[index-arity]".to_string(), "3".to_string()]);
    }

    #[test]
    fn repl_session() {
        let mut input = std::io::Cursor::new("(define $a\n  5)\n(+ a 1)\n:env\n[|1|]_1_2\n:quit\n(+ 1 1)\n");
        let mut out = Vec::new();
        assert_eq!(run_repl(&mut input, &mut out, &RunConfig::default()), 0);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("> 6\n"), "{text}");
        assert!(text.contains(" a "), "{text}");
        assert!(text.contains("error[index-arity]"), "{text}");
        assert!(!text.contains("2\n"), "{text}");
    }

    #[test]
    fn depth_counting() {
        assert_eq!(open_depth("(f [|1 2|]"), 1);
        assert_eq!(open_depth("(f \"(\" ; (\n)"), 0);
    }
}
