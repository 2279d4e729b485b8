//! Dataset files. Everything is JSON-lines, UTF-8, one game per line, with
//! structures rendered as token text so the files stand on their own:
//!
//! * train:   `{"rule": .., "rule_id": .., "observations": [[<tokens>, 0|1], ..]}`
//! * public:  `{"game": .., "board": [[<tokens>, 0|1], ..], "eval": [<tokens>, ..]}`
//! * answers: `{"game": .., "rule": .., "tags": "0110..."}`
//! * predictions (submissions): `{"game": .., "tags": "0110...", "rule": ..?}`
//!
//! A manifest records the parameters, seed, matrix checksum, and tool
//! version needed to regenerate the files byte for byte.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DatasetError, GeneratedDataset};
use crate::rules::RuleSet;
use crate::world::{parse_structure_tokens, render_structure_tokens, structure_from_id, WorldConfig};

#[derive(Serialize, Deserialize)]
struct TrainLine {
    rule: String,
    rule_id: usize,
    observations: Vec<(String, u8)>,
}

#[derive(Serialize, Deserialize)]
pub struct TestPublicLine {
    pub game: usize,
    pub board: Vec<(String, u8)>,
    pub eval: Vec<String>,
}

#[derive(Serialize, Deserialize)]
pub struct AnswerLine {
    pub game: usize,
    pub rule: String,
    pub tags: String,
}

#[derive(Serialize, Deserialize)]
pub struct PredictionLine {
    pub game: usize,
    pub tags: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct DatasetManifest {
    tool_version: String,
    params: super::DatasetParams,
    matrix_checksum: String,
    warnings: Vec<String>,
}

/// Paths of the four files a dataset run produces.
pub struct DatasetPaths {
    pub train: PathBuf,
    pub test_public: PathBuf,
    pub answers: PathBuf,
    pub manifest: PathBuf,
}

impl DatasetPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            train: dir.join("train.jsonl"),
            test_public: dir.join("test_public.jsonl"),
            answers: dir.join("test_answers.jsonl"),
            manifest: dir.join("manifest.json"),
        }
    }
}

fn tags_string(tags: &[bool]) -> String {
    tags.iter().map(|&t| if t { '1' } else { '0' }).collect()
}

/// Decodes a `"0110..."` tag string.
pub fn parse_tags_string(tags: &str) -> Result<Vec<bool>, DatasetError> {
    tags.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(DatasetError::BadFile(format!(
                "tag character {other:?}, expected 0 or 1"
            ))),
        })
        .collect()
}

fn render_id(id: u64, config: &WorldConfig) -> String {
    render_structure_tokens(&structure_from_id(id, config).expect("id in range"), config)
}

/// Writes the four dataset files; output bytes are a pure function of the
/// dataset and the metadata arguments.
pub fn write_dataset(
    dataset: &GeneratedDataset,
    rules: &RuleSet,
    matrix_checksum: u64,
    tool_version: &str,
    paths: &DatasetPaths,
) -> Result<(), DatasetError> {
    let config = rules.config();

    let mut train = BufWriter::new(File::create(&paths.train)?);
    for game in &dataset.train {
        let line = TrainLine {
            rule: rules.text(game.rule_id).to_string(),
            rule_id: game.rule_id,
            observations: game
                .observations
                .iter()
                .map(|&(id, tag)| (render_id(id, config), u8::from(tag)))
                .collect(),
        };
        serde_json::to_writer(&mut train, &line).map_err(io_error)?;
        train.write_all(b"\n")?;
    }
    train.flush()?;

    let mut public = BufWriter::new(File::create(&paths.test_public)?);
    let mut answers = BufWriter::new(File::create(&paths.answers)?);
    for game in &dataset.test {
        let public_line = TestPublicLine {
            game: game.game,
            board: game
                .board
                .iter()
                .map(|&(id, tag)| (render_id(id, config), u8::from(tag)))
                .collect(),
            eval: game.eval_ids.iter().map(|&id| render_id(id, config)).collect(),
        };
        serde_json::to_writer(&mut public, &public_line).map_err(io_error)?;
        public.write_all(b"\n")?;

        let answer_line = AnswerLine {
            game: game.game,
            rule: rules.text(game.rule_id).to_string(),
            tags: tags_string(&game.answer_tags),
        };
        serde_json::to_writer(&mut answers, &answer_line).map_err(io_error)?;
        answers.write_all(b"\n")?;
    }
    public.flush()?;
    answers.flush()?;

    let manifest = DatasetManifest {
        tool_version: tool_version.to_string(),
        params: dataset.params.clone(),
        matrix_checksum: format!("{matrix_checksum:#018x}"),
        warnings: dataset.warnings.clone(),
    };
    let mut out = BufWriter::new(File::create(&paths.manifest)?);
    serde_json::to_writer_pretty(&mut out, &manifest).map_err(io_error)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn io_error(e: serde_json::Error) -> DatasetError {
    DatasetError::Io(std::io::Error::other(e))
}

fn read_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| {
            DatasetError::BadFile(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?);
    }
    Ok(out)
}

/// A public test game with structures resolved back to IDs.
pub struct LoadedTestGame {
    pub game: usize,
    pub board: Vec<(u64, bool)>,
    pub eval_ids: Vec<u64>,
}

pub fn read_test_public(
    path: &Path,
    config: &WorldConfig,
) -> Result<Vec<LoadedTestGame>, DatasetError> {
    let lines: Vec<TestPublicLine> = read_lines(path)?;
    lines
        .into_iter()
        .map(|line| {
            let board = line
                .board
                .iter()
                .map(|(text, tag)| {
                    let id = parse_structure_tokens(text, config)
                        .map_err(|e| DatasetError::BadFile(e.to_string()))?
                        .id(config);
                    Ok((id, *tag != 0))
                })
                .collect::<Result<_, DatasetError>>()?;
            let eval_ids = line
                .eval
                .iter()
                .map(|text| {
                    Ok(parse_structure_tokens(text, config)
                        .map_err(|e| DatasetError::BadFile(e.to_string()))?
                        .id(config))
                })
                .collect::<Result<_, DatasetError>>()?;
            Ok(LoadedTestGame {
                game: line.game,
                board,
                eval_ids,
            })
        })
        .collect()
}

pub fn read_answers(path: &Path) -> Result<Vec<AnswerLine>, DatasetError> {
    read_lines(path)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionLine>, DatasetError> {
    read_lines(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_dataset, DatasetParams};
    use crate::semmatrix::build_matrix;

    #[test]
    fn files_roundtrip_and_regenerate_identically() {
        let config = WorldConfig::new(3, &["red", "blue"]).unwrap();
        let rules = RuleSet::enumerate(&config);
        let matrix = build_matrix(&rules).unwrap();
        let params = DatasetParams {
            n: 80,
            m: 30,
            s: 6,
            k: 16,
            l: 40,
            seed: 13,
            heldout_bigrams: vec!["exactly 2".to_string()],
            heldout_test_quota: 2,
        };
        let dir = tempfile::tempdir().unwrap();
        let paths_a = DatasetPaths::in_dir(&dir.path().join_with_create("a"));
        let paths_b = DatasetPaths::in_dir(&dir.path().join_with_create("b"));

        for paths in [&paths_a, &paths_b] {
            let dataset = generate_dataset(&params, &rules, &matrix).unwrap();
            write_dataset(&dataset, &rules, matrix.checksum(), "test", paths).unwrap();
        }
        for (a, b) in [
            (&paths_a.train, &paths_b.train),
            (&paths_a.test_public, &paths_b.test_public),
            (&paths_a.answers, &paths_b.answers),
            (&paths_a.manifest, &paths_b.manifest),
        ] {
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        }

        let games = read_test_public(&paths_a.test_public, &config).unwrap();
        let answers = read_answers(&paths_a.answers).unwrap();
        let dataset = generate_dataset(&params, &rules, &matrix).unwrap();
        assert_eq!(games.len(), dataset.test.len());
        for ((loaded, answer), generated) in games.iter().zip(&answers).zip(&dataset.test) {
            assert_eq!(loaded.board, generated.board);
            assert_eq!(loaded.eval_ids, generated.eval_ids);
            assert_eq!(answer.rule, rules.text(generated.rule_id));
            assert_eq!(
                parse_tags_string(&answer.tags).unwrap(),
                generated.answer_tags
            );
        }
    }

    trait JoinWithCreate {
        fn join_with_create(&self, name: &str) -> PathBuf;
    }
    impl JoinWithCreate for Path {
        fn join_with_create(&self, name: &str) -> PathBuf {
            let p = self.join(name);
            std::fs::create_dir_all(&p).unwrap();
            p
        }
    }
}
