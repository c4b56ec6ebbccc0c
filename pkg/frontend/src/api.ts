// Thin typed client over the annotation API.  Every method resolves to a
// discriminated union instead of throwing, so callers handle the 409/422
// contract explicitly.  The fetch function is injectable for tests.

import type {
  AgreementResponse,
  RankingItem,
  SubmissionIssues,
  TaskDetail,
  TaskSummary,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export type SubmitResult =
  | { kind: "ok"; n: number }
  | { kind: "invalid"; detail: string; issues: SubmissionIssues }
  | { kind: "conflict"; detail: string }
  | { kind: "error"; status: number; detail: string };

export type AgreementResult =
  | { kind: "ok"; agreement: AgreementResponse }
  | { kind: "unavailable"; detail: string }
  | { kind: "error"; status: number; detail: string };

function detailOf(body: unknown): string {
  if (body && typeof body === "object" && "detail" in body) {
    return String((body as { detail: unknown }).detail);
  }
  return "unexpected server response";
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    private readonly baseUrl: string = "",
  ) {}

  async listTasks(): Promise<TaskSummary[]> {
    const response = await this.fetchFn(`${this.baseUrl}/tasks`);
    if (response.status !== 200) {
      throw new Error(`task list failed with status ${response.status}`);
    }
    return (await response.json()) as TaskSummary[];
  }

  async getTask(taskId: string): Promise<TaskDetail> {
    const response = await this.fetchFn(
      `${this.baseUrl}/tasks/${encodeURIComponent(taskId)}`,
    );
    if (response.status !== 200) {
      throw new Error(`task ${taskId} failed with status ${response.status}`);
    }
    return (await response.json()) as TaskDetail;
  }

  async submitRanking(
    taskId: string,
    ranking: RankingItem[],
  ): Promise<SubmitResult> {
    const response = await this.fetchFn(
      `${this.baseUrl}/tasks/${encodeURIComponent(taskId)}/ranking`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ ranking }),
      },
    );
    const body = await response.json();
    if (response.status === 200) {
      return { kind: "ok", n: (body as { n: number }).n };
    }
    if (response.status === 422) {
      const { detail, ...issues } = body as SubmissionIssues & { detail: string };
      return { kind: "invalid", detail, issues };
    }
    if (response.status === 409) {
      return { kind: "conflict", detail: detailOf(body) };
    }
    return { kind: "error", status: response.status, detail: detailOf(body) };
  }

  async getAgreement(taskId: string): Promise<AgreementResult> {
    const response = await this.fetchFn(
      `${this.baseUrl}/tasks/${encodeURIComponent(taskId)}/agreement`,
    );
    const body = await response.json();
    if (response.status === 200) {
      return { kind: "ok", agreement: body as AgreementResponse };
    }
    if (response.status === 409) {
      return { kind: "unavailable", detail: detailOf(body) };
    }
    return { kind: "error", status: response.status, detail: detailOf(body) };
  }
}
