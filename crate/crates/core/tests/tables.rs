use std::collections::HashSet;

use evolvability::ann_space::{
    load_table, read_manifest, single_mutation_neighbors, verify_coverage, FixedAnnController,
    GeneMask, Subspace, MANIFEST_FILE,
};
use evolvability::harness::{build_table, merged_bytes, TableConfig};
use evolvability::maze::{evaluate_controller, Maze};
use evolvability::Error;

fn config(mask: &str, shards: usize) -> TableConfig {
    TableConfig {
        mask: mask.parse::<GeneMask>().unwrap(),
        shards,
        ..Default::default()
    }
}

#[test]
fn two_gene_space_matches_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("0000*0000000000*00", 2);
    let (manifest, table) = build_table(Maze::default_text(), &cfg, 2, dir.path()).unwrap();
    assert_eq!(table.len(), 9);
    assert_eq!(manifest.space_size, 9);

    let maze = Maze::default_maze(cfg.robot.radius);
    let niche = |g: &evolvability::ann_space::FixedAnnGenome| {
        let mut c = FixedAnnController::new(g, cfg.steepness);
        evaluate_controller(&maze, &mut c, &cfg.robot).unwrap().niche.id()
    };
    let space = Subspace::new(cfg.mask);
    for compact in 0..9 {
        let g = space.genome(compact);
        let reachable: HashSet<u16> = single_mutation_neighbors(&g)
            .iter()
            .filter(|n| cfg.mask.admits(n))
            .map(|n| niche(n))
            .collect();
        let rec = table.get_compact(compact);
        assert_eq!(rec.niche, niche(&g), "genotype {compact}");
        assert_eq!(rec.evolvability as usize, reachable.len(), "genotype {compact}");
    }
}

#[test]
fn worker_and_shard_counts_do_not_change_the_table() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (_, one) = build_table(Maze::default_text(), &config("***0000000**000000", 1), 1, a.path()).unwrap();
    let (m2, two) = build_table(Maze::default_text(), &config("***0000000**000000", 3), 2, b.path()).unwrap();
    assert_eq!(m2.shards.len(), 3);
    assert_eq!(merged_bytes(&one), merged_bytes(&two));
    let (_, reloaded) = load_table(&b.path().join(MANIFEST_FILE), Maze::default_text()).unwrap();
    assert_eq!(merged_bytes(&reloaded), merged_bytes(&one));
}

#[test]
fn load_refuses_a_different_maze() {
    let dir = tempfile::tempdir().unwrap();
    build_table(Maze::default_text(), &config("**0000000000000000", 1), 1, dir.path()).unwrap();
    let edited = Maze::default_text().replace("start 20 25 0", "start 20 26 0");
    let err = load_table(&dir.path().join(MANIFEST_FILE), &edited).unwrap_err();
    assert!(matches!(err, Error::Integrity(_)), "{err}");
}

#[test]
fn load_refuses_tampered_or_missing_shards() {
    let dir = tempfile::tempdir().unwrap();
    build_table(Maze::default_text(), &config("***000000000000000", 2), 1, dir.path()).unwrap();
    let manifest_path = dir.path().join(MANIFEST_FILE);
    let manifest = read_manifest(&manifest_path).unwrap();

    let shard = dir.path().join(&manifest.shards[1].file);
    let mut bytes = std::fs::read(&shard).unwrap();
    let last = bytes.len() - 2;
    bytes[last] ^= 1;
    std::fs::write(&shard, &bytes).unwrap();
    assert!(matches!(
        load_table(&manifest_path, Maze::default_text()),
        Err(Error::Integrity(_))
    ));

    let mut gap = manifest.clone();
    gap.shards.remove(0);
    std::fs::write(&manifest_path, serde_json::to_string(&gap).unwrap()).unwrap();
    let err = load_table(&manifest_path, Maze::default_text()).unwrap_err();
    assert!(err.to_string().contains("gap"), "{err}");
}

#[test]
fn coverage_diagnostics() {
    assert!(verify_coverage(&[(0, 10), (10, 17)], 27).is_ok());
    let gap = verify_coverage(&[(0, 10), (11, 16)], 27).unwrap_err().to_string();
    assert!(gap.contains("gap"));
    let overlap = verify_coverage(&[(0, 10), (9, 18)], 27).unwrap_err().to_string();
    assert!(overlap.contains("overlap"));
}
