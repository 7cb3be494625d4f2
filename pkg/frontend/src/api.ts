/** Typed client for the session service's structured-text protocol. */

import { parseRecord, renderRecord, Record } from "./records.js";

export interface SessionState {
  session: string;
  revision: number;
  hash: string;
  problemText: string;
  provenance: { [label: string]: string };
}

export interface JobState {
  job: string;
  status: "running" | "done" | "cancelled" | "failed";
  progress: { [key: string]: string };
  message?: string;
  result: string;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request(url: string, init?: RequestInit): Promise<Record> {
  const response = await fetch(url, init);
  const record = parseRecord(await response.text());
  if (!response.ok) {
    throw new ServiceError(
      response.status,
      record.fields["error"] ?? "unknown",
      record.fields["message"] ?? "request failed",
    );
  }
  return record;
}

function sessionState(record: Record): SessionState {
  const provenance: { [label: string]: string } = {};
  for (const [key, value] of Object.entries(record.fields)) {
    if (key.startsWith("set-")) provenance[key.slice(4)] = value;
  }
  return {
    session: record.fields["session"],
    revision: Number(record.fields["revision"]),
    hash: record.fields["hash"],
    problemText: record.body,
    provenance,
  };
}

export class ServiceClient {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createSession(problemText: string): Promise<SessionState> {
    return sessionState(
      await request(this.url("/sessions"), { method: "POST", body: problemText }),
    );
  }

  async getSession(id: string): Promise<SessionState> {
    return sessionState(await request(this.url(`/sessions/${id}`)));
  }

  async applyAction(
    id: string,
    kind: string,
    fields: { [key: string]: string } = {},
    body = "",
  ): Promise<SessionState> {
    const record = await request(this.url(`/sessions/${id}/actions`), {
      method: "POST",
      body: renderRecord({ kind, ...fields }, body),
    });
    return sessionState(record);
  }

  async undo(id: string): Promise<SessionState> {
    return sessionState(
      await request(this.url(`/sessions/${id}/undo`), { method: "POST" }),
    );
  }

  async redo(id: string): Promise<SessionState> {
    return sessionState(
      await request(this.url(`/sessions/${id}/redo`), { method: "POST" }),
    );
  }

  async diagram(id: string, side: "white" | "black"): Promise<string[]> {
    const record = await request(this.url(`/sessions/${id}/diagram?side=${side}`));
    return record.body.split("\n").filter((line) => line.includes("->"));
  }

  async zeroRound(id: string): Promise<{ [key: string]: string }> {
    return (await request(this.url(`/sessions/${id}/zeroround`))).fields;
  }

  async history(id: string): Promise<{ cursor: number; lines: string[] }> {
    const record = await request(this.url(`/sessions/${id}/history`));
    return {
      cursor: Number(record.fields["cursor"]),
      lines: record.body.split("\n").filter(Boolean),
    };
  }

  async startAutobound(
    id: string,
    maxLabels: number,
    maxSteps: number,
  ): Promise<string> {
    const record = await request(this.url(`/sessions/${id}/jobs`), {
      method: "POST",
      body: renderRecord({
        kind: "autobound",
        "max-labels": String(maxLabels),
        "max-steps": String(maxSteps),
      }),
    });
    return record.fields["job"];
  }

  async jobStatus(job: string): Promise<JobState> {
    const record = await request(this.url(`/jobs/${job}`));
    const progress: { [key: string]: string } = {};
    for (const [key, value] of Object.entries(record.fields)) {
      if (key.startsWith("progress-")) progress[key.slice(9)] = value;
    }
    return {
      job: record.fields["job"],
      status: record.fields["status"] as JobState["status"],
      progress,
      message: record.fields["message"],
      result: record.body,
    };
  }

  async cancelJob(job: string): Promise<void> {
    await request(this.url(`/jobs/${job}/cancel`), { method: "POST" });
  }
}
