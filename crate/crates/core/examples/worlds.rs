//! Mazes, random geometric graphs, expert labels and the dataset archive.

use mpvin::worlds::{
    dijkstra_labels, generate_dataset, generate_graph_world, generate_maze, Dataset, GraphWorldParams, Split,
    WorldParams,
};

fn main() -> mpvin::Result<()> {
    let maze = generate_maze(9, 3)?;
    for r in 0..maze.size() {
        let row: String = (0..maze.size())
            .map(|c| {
                if (r, c) == maze.goal() {
                    'G'
                } else if maze.is_free(r, c) {
                    '.'
                } else {
                    '#'
                }
            })
            .collect();
        println!("{row}");
    }

    let graph = generate_graph_world(&GraphWorldParams::with_nodes(64), 5)?;
    let sample = dijkstra_labels(&graph);
    println!(
        "graph: {} nodes, {} edges, goal {}, {} supervised nodes",
        graph.n_nodes(),
        graph.n_edges(),
        graph.goal(),
        sample.n_supervised()
    );
    let start = (0..graph.n_nodes()).find(|&i| sample.reachable[i] && i != graph.goal()).unwrap();
    println!("label at node {start}: {:?}", sample.labels[start]);

    let data = generate_dataset(WorldParams::Graph(GraphWorldParams::with_nodes(64)), Split::Train, 8, 1)?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("train_64.mpvn");
    data.save(&path)?;
    let back = Dataset::load(&path)?;
    println!("archive round trip: {} samples, identical {}", back.len(), back == data);
    Ok(())
}
