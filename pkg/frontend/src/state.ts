/** Session view-model: service-confirmed state plus the client-side history
 * tree.  Nothing here mutates a problem locally; stale views refetch. */

import { ServiceClient, SessionState, JobState } from "./api.js";
import { HistoryTree } from "./history.js";

export class SessionView {
  state: SessionState | null = null;
  tree = new HistoryTree();
  job: JobState | null = null;
  private jobId: string | null = null;

  constructor(private client: ServiceClient) {}

  get problemText(): string {
    return this.state?.problemText ?? "";
  }

  async load(problemText: string): Promise<SessionState> {
    this.state = await this.client.createSession(problemText);
    this.tree = new HistoryTree();
    this.tree.confirm("load", this.state.hash, this.state.revision);
    return this.state;
  }

  private requireSession(): string {
    if (!this.state) throw new Error("no session loaded");
    return this.state.session;
  }

  async apply(
    kind: string,
    fields: { [key: string]: string } = {},
    body = "",
  ): Promise<SessionState> {
    const id = this.requireSession();
    this.state = await this.client.applyAction(id, kind, fields, body);
    this.tree.confirm(kind, this.state.hash, this.state.revision);
    return this.state;
  }

  async undo(): Promise<SessionState> {
    const id = this.requireSession();
    this.state = await this.client.undo(id);
    this.tree.undo(this.state.revision);
    await this.verifyConsistent();
    return this.state;
  }

  async redo(): Promise<SessionState> {
    const id = this.requireSession();
    this.state = await this.client.redo(id);
    this.tree.redo(this.state.revision);
    await this.verifyConsistent();
    return this.state;
  }

  /** Stale views refetch: the tree's hash must equal the service's. */
  async verifyConsistent(): Promise<void> {
    if (!this.state || this.tree.current === null) return;
    const node = this.tree.nodes.get(this.tree.current)!;
    if (node.hash !== this.state.hash) {
      this.state = await this.client.getSession(this.state.session);
    }
  }

  async diagram(side: "white" | "black"): Promise<string[]> {
    return this.client.diagram(this.requireSession(), side);
  }

  async zeroRound(): Promise<{ [key: string]: string }> {
    return this.client.zeroRound(this.requireSession());
  }

  async startAutobound(maxLabels: number, maxSteps: number): Promise<void> {
    this.jobId = await this.client.startAutobound(
      this.requireSession(),
      maxLabels,
      maxSteps,
    );
    this.job = await this.client.jobStatus(this.jobId);
  }

  async pollJob(): Promise<JobState | null> {
    if (!this.jobId) return null;
    this.job = await this.client.jobStatus(this.jobId);
    return this.job;
  }

  async cancelJob(): Promise<void> {
    if (this.jobId) await this.client.cancelJob(this.jobId);
  }
}
