/** Branching history tree for the timeline panel.
 *
 * The service keeps a linear history whose redo tail is truncated by a new
 * action; the tree retains truncated branches for display.  Only states the
 * service confirmed are recorded, each with its canonical hash.
 */

export interface HistoryNode {
  id: number;
  parent: number | null;
  action: string;
  hash: string;
  revision: number;
  children: number[];
  live: boolean; // still on the service's linear history
}

export class HistoryTree {
  nodes = new Map<number, HistoryNode>();
  current: number | null = null;
  private nextId = 0;

  root(): HistoryNode | null {
    for (const node of this.nodes.values()) if (node.parent === null) return node;
    return null;
  }

  /** Record a state confirmed by the service. */
  confirm(action: string, hash: string, revision: number): HistoryNode {
    const parent = this.current;
    if (parent !== null) {
      const parentNode = this.nodes.get(parent)!;
      // a new action after undo forks a branch; the abandoned siblings stay
      for (const childId of parentNode.children) {
        this.markDead(childId);
      }
    }
    const node: HistoryNode = {
      id: this.nextId++,
      parent,
      action,
      hash,
      revision,
      children: [],
      live: true,
    };
    this.nodes.set(node.id, node);
    if (parent !== null) this.nodes.get(parent)!.children.push(node.id);
    this.current = node.id;
    return node;
  }

  private markDead(id: number) {
    const node = this.nodes.get(id)!;
    node.live = false;
    node.children.forEach((child) => this.markDead(child));
  }

  /** Move the pointer along a confirmed undo. */
  undo(revision: number): HistoryNode | null {
    if (this.current === null) return null;
    const node = this.nodes.get(this.current)!;
    if (node.parent === null) return null;
    this.current = node.parent;
    const parent = this.nodes.get(node.parent)!;
    if (parent.revision !== revision) {
      throw new Error(`history out of sync: ${parent.revision} != ${revision}`);
    }
    return parent;
  }

  /** Move the pointer along a confirmed redo (most recent live child). */
  redo(revision: number): HistoryNode | null {
    if (this.current === null) return null;
    const node = this.nodes.get(this.current)!;
    const live = node.children.filter((c) => this.nodes.get(c)!.live);
    if (!live.length) return null;
    const child = this.nodes.get(live[live.length - 1])!;
    if (child.revision !== revision) {
      throw new Error(`history out of sync: ${child.revision} != ${revision}`);
    }
    this.current = child.id;
    return child;
  }

  /** Depth-first timeline with branch depth, current marker and liveness. */
  timeline(): Array<{ node: HistoryNode; depth: number; current: boolean }> {
    const out: Array<{ node: HistoryNode; depth: number; current: boolean }> = [];
    const walk = (id: number, depth: number) => {
      const node = this.nodes.get(id)!;
      out.push({ node, depth, current: id === this.current });
      node.children.forEach((child) => walk(child, depth + 1));
    };
    const root = this.root();
    if (root) walk(root.id, 0);
    return out;
  }
}
