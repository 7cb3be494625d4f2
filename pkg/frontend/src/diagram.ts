/** Layered layout and SVG rendering for strength diagrams.
 *
 * Labels are grouped into equal-strength classes (mutual arrows), classes are
 * ranked by longest path over the strict arrows, and everything is ordered by
 * label name, so the same diagram always renders the same picture.
 */

export interface Arrow {
  from: string;
  to: string;
}

export interface DiagramLayout {
  layers: string[][]; // weakest layer first
  arrows: Arrow[];
  equal: Array<[string, string]>;
}

export function parseArrows(lines: string[]): Arrow[] {
  return lines
    .filter((line) => line.includes("->"))
    .map((line) => {
      const [from, to] = line.split("->").map((part) => part.trim());
      return { from, to };
    });
}

export function layoutDiagram(labels: string[], arrows: Arrow[]): DiagramLayout {
  const arrowSet = new Set(arrows.map((a) => `${a.from}>${a.to}`));
  const has = (from: string, to: string) => arrowSet.has(`${from}>${to}`);

  // equal-strength classes: mutual arrows
  const classOf = new Map<string, string>();
  for (const label of [...labels].sort()) {
    if (classOf.has(label)) continue;
    classOf.set(label, label);
    for (const other of labels) {
      if (other !== label && has(label, other) && has(other, label)) {
        classOf.set(other, label);
      }
    }
  }
  const equal: Array<[string, string]> = [];
  for (const [label, rep] of classOf) {
    if (label !== rep) equal.push([rep, label]);
  }

  // strict arrows between class representatives
  const reps = [...new Set(classOf.values())].sort();
  const strict = new Map<string, Set<string>>(reps.map((r) => [r, new Set()]));
  for (const a of arrows) {
    const from = classOf.get(a.from)!;
    const to = classOf.get(a.to)!;
    if (from !== to) strict.get(from)!.add(to);
  }

  // longest-path rank from the weakest elements upward
  const rank = new Map<string, number>();
  const visiting = new Set<string>();
  const depth = (rep: string): number => {
    if (rank.has(rep)) return rank.get(rep)!;
    if (visiting.has(rep)) return 0; // defensive: cycles collapse to one layer
    visiting.add(rep);
    let r = 0;
    for (const other of reps) {
      if (strict.get(other)!.has(rep)) r = Math.max(r, depth(other) + 1);
    }
    visiting.delete(rep);
    rank.set(rep, r);
    return r;
  };
  reps.forEach(depth);

  const height = Math.max(0, ...rank.values());
  const layers: string[][] = Array.from({ length: height + 1 }, () => []);
  for (const label of [...labels].sort()) {
    layers[rank.get(classOf.get(label)!)!].push(label);
  }
  return { layers: layers.filter((layer) => layer.length > 0), arrows, equal };
}

const NODE_W = 46;
const NODE_H = 26;
const GAP_X = 30;
const GAP_Y = 48;

export function renderDiagramSvg(layout: DiagramLayout): string {
  const positions = new Map<string, { x: number; y: number }>();
  const rows = layout.layers.length;
  let width = 120;
  layout.layers.forEach((layer, i) => {
    const y = (rows - 1 - i) * (NODE_H + GAP_Y) + NODE_H;
    layer.forEach((label, j) => {
      const x = j * (NODE_W + GAP_X) + NODE_W;
      positions.set(label, { x, y });
      width = Math.max(width, x + NODE_W + GAP_X);
    });
  });
  const height = rows * (NODE_H + GAP_Y) + NODE_H;
  const parts: string[] = [];
  for (const arrow of layout.arrows) {
    const from = positions.get(arrow.from);
    const to = positions.get(arrow.to);
    if (!from || !to) continue;
    parts.push(
      `<line class="arrow" x1="${from.x}" y1="${from.y - NODE_H / 2}" ` +
        `x2="${to.x}" y2="${to.y + NODE_H / 2}" marker-end="url(#head)"/>`,
    );
  }
  for (const [label, pos] of positions) {
    parts.push(
      `<g class="label-node" data-label="${label}">` +
        `<rect x="${pos.x - NODE_W / 2}" y="${pos.y - NODE_H / 2}" ` +
        `width="${NODE_W}" height="${NODE_H}" rx="6"/>` +
        `<text x="${pos.x}" y="${pos.y + 5}" text-anchor="middle">${label}</text></g>`,
    );
  }
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">` +
    `<defs><marker id="head" markerWidth="8" markerHeight="8" refX="6" refY="3" ` +
    `orient="auto"><path d="M0,0 L6,3 L0,6 z"/></marker></defs>` +
    parts.join("") +
    `</svg>`
  );
}

/** Transitive strength: does the arrow diagram let `from` be replaced by `to`?
 * Covers plus equalities reconstruct the full preorder on distinct labels. */
export function reachable(arrows: Arrow[], from: string, to: string): boolean {
  if (from === to) return true;
  const adjacency = new Map<string, string[]>();
  for (const a of arrows) {
    if (!adjacency.has(a.from)) adjacency.set(a.from, []);
    adjacency.get(a.from)!.push(a.to);
  }
  const seen = new Set<string>([from]);
  const queue = [from];
  while (queue.length) {
    const current = queue.shift()!;
    for (const next of adjacency.get(current) ?? []) {
      if (next === to) return true;
      if (!seen.has(next)) {
        seen.add(next);
        queue.push(next);
      }
    }
  }
  return false;
}
