use std::path::{Path, PathBuf};

use tegi::cli::{check_file, corpus_files};
use tegi::lang::parse_program;

fn corpus() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let files = corpus_files(&dir).unwrap();
    assert!(!files.is_empty());
    files
}

#[test]
fn golden_files_match_annotations() {
    for f in corpus() {
        if let Err(problems) = check_file(&f) {
            panic!("{}:\n{}", f.display(), problems.join("\n"));
        }
    }
}

fn printed(text: &str) -> Vec<String> {
    parse_program(text).unwrap().iter().map(|n| n.to_string()).collect()
}

#[test]
fn printing_round_trips() {
    for f in corpus() {
        let text = std::fs::read_to_string(&f).unwrap();
        let once = printed(&text);
        let twice = printed(&once.join("\n"));
        assert_eq!(once, twice, "{}", f.display());
    }
    let prelude = include_str!("../src/eval/prelude.tegi");
    let once = printed(prelude);
    assert_eq!(printed(&once.join("\n")), once);
}

#[test]
fn script_matches_golden_program() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let script = std::fs::read_to_string(root.join("scripts/s2.tegi")).unwrap();
    let golden = std::fs::read_to_string(root.join("tests/golden/06_sphere.tegi")).unwrap();
    let defines = |t: &str| -> Vec<String> {
        printed(t).into_iter().filter(|s| s.starts_with("(define")).collect()
    };
    assert_eq!(defines(&script), defines(&golden));
}
