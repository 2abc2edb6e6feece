/** Layered DAG layout for the prerequisite diagram.
 *
 * Nodes sit on the layer given by their longest prerequisite chain, so every
 * edge points upward by at least one layer (the convention of a Hasse
 * drawing).  Pure functions only; rendering lives elsewhere.
 */

export interface LayoutNode {
  id: string;
  layer: number;
  /** normalized 0..1 horizontal position */
  x: number;
}

export interface Layout {
  nodes: LayoutNode[];
  layers: string[][];
  edges: [string, string][];
}

export function longestPathLayers(
  items: string[],
  edges: [string, string][],
): Map<string, number> {
  const preds = new Map<string, string[]>(items.map((q) => [q, []]));
  for (const [a, b] of edges) {
    const list = preds.get(b);
    if (!list) throw new Error(`edge endpoint ${b} missing from items`);
    if (!preds.has(a)) throw new Error(`edge endpoint ${a} missing from items`);
    list.push(a);
  }
  const layer = new Map<string, number>();
  const visiting = new Set<string>();
  const depth = (q: string): number => {
    const known = layer.get(q);
    if (known !== undefined) return known;
    if (visiting.has(q)) throw new Error(`cycle through ${q}`);
    visiting.add(q);
    const below = preds.get(q)!.map(depth);
    const value = below.length ? Math.max(...below) + 1 : 0;
    visiting.delete(q);
    layer.set(q, value);
    return value;
  };
  items.forEach(depth);
  return layer;
}

export function layoutHasse(items: string[], edges: [string, string][]): Layout {
  const layerOf = longestPathLayers(items, edges);
  const depthMax = Math.max(0, ...layerOf.values());
  const layers: string[][] = Array.from({ length: depthMax + 1 }, () => []);
  for (const q of [...items].sort()) {
    layers[layerOf.get(q)!].push(q);
  }
  const nodes: LayoutNode[] = [];
  layers.forEach((row, layerIndex) => {
    row.forEach((id, i) => {
      nodes.push({ id, layer: layerIndex, x: (i + 1) / (row.length + 1) });
    });
  });
  return { nodes, layers, edges };
}
