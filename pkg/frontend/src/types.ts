// Payload shapes of the annotation HTTP API, mirrored one-to-one.

export type ImpactCategory = "High" | "Medium" | "Low";

export const CATEGORIES: ImpactCategory[] = ["High", "Medium", "Low"];

export type TaskSummary = {
  task_id: string;
  citing_title: string;
  n_references: number;
  status: "open" | "submitted";
};

export type TaskReference = {
  paperId: string;
  title: string;
  contexts: string[];
};

export type RankingItem = {
  paperId: string;
  category: string;
};

export type TaskDetail = {
  task_id: string;
  citing: { id: string; title: string; abstract: string | null };
  status: "open" | "submitted";
  shuffle_seed: number;
  impact_definitions: Record<ImpactCategory, string>;
  references: TaskReference[];
  submitted_ranking: RankingItem[] | null;
};

// 422 body: which ids broke the bijection/category rules, by kind.
export type SubmissionIssues = {
  missing?: string[];
  duplicates?: string[];
  unknown?: string[];
  invalid_category?: string[];
};

export type AgreementResponse = {
  task_id: string;
  spearman: number;
  n: number;
};
