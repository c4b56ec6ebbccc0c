// DOM layer: task list, ranking board, submission flow, agreement panel.
//
// The board mutates only local state (TaskModel + drafts) until the
// annotator hits submit; the server stays the source of truth and its
// 409/422 answers are surfaced in place.

import { ApiClient } from "./api.js";
import { DraftStore } from "./drafts.js";
import { TaskModel, issuesByCard } from "./model.js";
import type { ImpactCategory, TaskDetail, TaskSummary, RankingItem } from "./types.js";
import { CATEGORIES } from "./types.js";

const CATEGORY_CLASS: Record<ImpactCategory, string> = {
  High: "cat-high",
  Medium: "cat-medium",
  Low: "cat-low",
};

const ISSUE_TEXT: Record<string, string> = {
  missing: "missing from the submission",
  duplicates: "appears more than once",
  unknown: "not part of this task",
  invalid_category: "category not recognized",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderTaskList(
  root: HTMLElement,
  tasks: TaskSummary[],
  onOpen: (taskId: string) => void,
): void {
  root.textContent = "";
  const heading = el("h1", "app-title", "Reference ranking tasks");
  root.appendChild(heading);
  const list = el("ul", "task-list");
  for (const task of tasks) {
    const item = el("li", "task-row");
    item.dataset.taskId = task.task_id;
    const open = el("button", "task-open", task.citing_title);
    open.addEventListener("click", () => onOpen(task.task_id));
    item.appendChild(open);
    item.appendChild(
      el("span", "task-meta", `${task.n_references} references`),
    );
    item.appendChild(el("span", `task-status task-status--${task.status}`, task.status));
    list.appendChild(item);
  }
  root.appendChild(list);
}

export class TaskController {
  readonly model: TaskModel;
  private readonly detail: TaskDetail;
  private submitted: RankingItem[] | null;
  private dragFrom: number | null = null;

  constructor(
    private readonly root: HTMLElement,
    detail: TaskDetail,
    private readonly api: ApiClient,
    private readonly drafts: DraftStore,
    private readonly onBack?: () => void,
  ) {
    this.detail = detail;
    this.model = new TaskModel(detail.task_id, detail.references);
    this.submitted = detail.submitted_ranking;
    if (this.submitted === null) {
      const draft = this.drafts.load(detail.task_id);
      if (draft) this.model.restoreDraft(draft);
    }
    this.render();
    if (this.submitted !== null) void this.refreshAgreement();
  }

  private saveDraft(): void {
    this.drafts.save(this.detail.task_id, this.model.toDraft());
  }

  moveCard(from: number, to: number): void {
    if (this.submitted !== null) return;
    if (this.model.move(from, to)) {
      this.saveDraft();
      this.renderCards();
    }
  }

  // --- rendering ----------------------------------------------------------

  private render(): void {
    this.root.textContent = "";
    const header = el("div", "task-header");
    if (this.onBack) {
      const back = el("button", "back-button", "← all tasks");
      back.addEventListener("click", () => this.onBack!());
      header.appendChild(back);
    }
    header.appendChild(el("h1", "app-title", this.detail.citing.title));
    if (this.detail.citing.abstract) {
      header.appendChild(el("p", "abstract", this.detail.citing.abstract));
    }
    this.root.appendChild(header);

    const banner = el("div", "banner");
    banner.id = "banner";
    banner.hidden = true;
    this.root.appendChild(banner);

    const layout = el("div", "layout");
    const board = el("div", "board");
    const cards = el("ol", "cards");
    cards.id = "cards";
    board.appendChild(cards);

    if (this.submitted === null) {
      const submit = el("button", "submit-button", "Submit ranking");
      submit.id = "submit";
      submit.addEventListener("click", () => void this.submit());
      board.appendChild(submit);
    } else {
      const done = el("p", "submitted-note", "Ranking submitted — task is read-only.");
      board.appendChild(done);
    }

    const agreement = el("div", "agreement");
    agreement.id = "agreement";
    agreement.hidden = true;
    board.appendChild(agreement);

    layout.appendChild(board);
    layout.appendChild(this.renderDefinitions());
    this.root.appendChild(layout);
    this.renderCards();
  }

  private renderDefinitions(): HTMLElement {
    // kept on screen next to the board for the whole task
    const aside = el("aside", "definitions");
    aside.appendChild(el("h2", undefined, "Impact categories"));
    for (const category of CATEGORIES) {
      const block = el("div", `definition ${CATEGORY_CLASS[category]}`);
      block.appendChild(el("h3", undefined, category));
      block.appendChild(
        el("p", undefined, this.detail.impact_definitions[category] ?? ""),
      );
      aside.appendChild(block);
    }
    return aside;
  }

  private renderCards(): void {
    const cards = this.root.querySelector("#cards") as HTMLElement;
    cards.textContent = "";
    if (this.submitted !== null) {
      this.renderSubmitted(cards);
      return;
    }
    this.model.list().forEach((card, index) => {
      const item = el("li", "card");
      item.dataset.paperId = card.paperId;
      if (card.category) item.classList.add(CATEGORY_CLASS[card.category]);
      item.draggable = true;
      item.addEventListener("dragstart", (event: DragEvent) => {
        this.dragFrom = index;
        event.dataTransfer?.setData("text/plain", card.paperId);
      });
      item.addEventListener("dragover", (event: DragEvent) => {
        event.preventDefault(); // allow dropping onto another card
      });
      item.addEventListener("drop", (event: DragEvent) => {
        event.preventDefault();
        if (this.dragFrom !== null) this.moveCard(this.dragFrom, index);
        this.dragFrom = null;
      });
      item.addEventListener("dragend", () => {
        // dropped outside the list: nothing moved
        this.dragFrom = null;
      });

      const head = el("div", "card-head");
      head.appendChild(el("span", "card-rank", String(index + 1)));
      head.appendChild(el("span", "card-title", card.title));

      const nudge = el("span", "nudge");
      const up = el("button", "nudge-up", "↑");
      up.title = "move up";
      up.addEventListener("click", () => this.moveCard(index, index - 1));
      const down = el("button", "nudge-down", "↓");
      down.title = "move down";
      down.addEventListener("click", () => this.moveCard(index, index + 1));
      nudge.appendChild(up);
      nudge.appendChild(down);
      head.appendChild(nudge);
      item.appendChild(head);

      const controls = el("div", "card-controls");
      for (const category of CATEGORIES) {
        const pick = el(
          "button",
          `category-pick ${CATEGORY_CLASS[category]}` +
            (card.category === category ? " category-pick--active" : ""),
          category,
        );
        pick.addEventListener("click", () => {
          this.model.setCategory(card.paperId, category);
          this.saveDraft();
          this.renderCards();
        });
        controls.appendChild(pick);
      }
      const toggle = el(
        "button",
        "contexts-toggle",
        card.contextsVisible ? "Hide Citation Contexts" : "Show Citation Contexts",
      );
      toggle.addEventListener("click", () => {
        this.model.toggleContexts(card.paperId);
        this.renderCards();
      });
      controls.appendChild(toggle);
      item.appendChild(controls);

      if (card.contextsVisible) {
        const panel = el("div", "contexts");
        if (card.contexts.length === 0) {
          panel.appendChild(
            el("p", "contexts-empty", "No citation contexts were found for this reference."),
          );
        } else {
          for (const context of card.contexts) {
            panel.appendChild(el("blockquote", "context", context));
          }
        }
        item.appendChild(panel);
      }

      const note = el("div", "card-issues");
      note.hidden = true;
      item.appendChild(note);
      cards.appendChild(item);
    });
  }

  private renderSubmitted(cards: HTMLElement): void {
    for (const [index, item] of (this.submitted ?? []).entries()) {
      const card = this.model.card(item.paperId);
      const row = el("li", "card card--locked");
      row.dataset.paperId = item.paperId;
      const category = item.category as ImpactCategory;
      if (CATEGORY_CLASS[category]) row.classList.add(CATEGORY_CLASS[category]);
      const head = el("div", "card-head");
      head.appendChild(el("span", "card-rank", String(index + 1)));
      head.appendChild(el("span", "card-title", card?.title ?? item.paperId));
      head.appendChild(el("span", "card-category", item.category));
      row.appendChild(head);
      cards.appendChild(row);
    }
  }

  // --- submission ---------------------------------------------------------

  private banner(): HTMLElement {
    return this.root.querySelector("#banner") as HTMLElement;
  }

  private showBanner(kind: "error" | "info", text: string): void {
    const banner = this.banner();
    banner.hidden = false;
    banner.className = `banner banner--${kind}`;
    banner.textContent = text;
  }

  async submit(): Promise<void> {
    if (this.submitted !== null) return;
    const unset = this.model.missingCategories();
    if (unset.length > 0) {
      this.showBanner(
        "error",
        `Every reference needs an impact category before submitting (${unset.length} left).`,
      );
      this.markCards(new Map(unset.map((id) => [id, ["category required"]])));
      return;
    }

    const result = await this.api.submitRanking(
      this.detail.task_id,
      this.model.ranking(),
    );
    if (result.kind === "ok") {
      this.submitted = this.model.ranking();
      this.drafts.clear(this.detail.task_id);
      this.render();
      this.showBanner("info", "Ranking submitted.");
      await this.refreshAgreement();
      return;
    }
    if (result.kind === "invalid") {
      const byCard = issuesByCard(result.issues);
      const labeled = new Map(
        [...byCard.entries()].map(([id, kinds]) => [
          id,
          kinds.map((kind) => ISSUE_TEXT[kind] ?? kind),
        ]),
      );
      this.markCards(labeled);
      const named = [...byCard.keys()].join(", ");
      this.showBanner("error", `${result.detail} (${named})`);
      return;
    }
    if (result.kind === "conflict") {
      this.showBanner("error", result.detail);
      return;
    }
    this.showBanner("error", `Submission failed (${result.status}): ${result.detail}`);
  }

  /** Attach inline issue notes to the named cards; others are cleared. */
  private markCards(labels: Map<string, string[]>): void {
    const items = this.root.querySelectorAll<HTMLElement>(".card");
    for (const item of items) {
      const note = item.querySelector<HTMLElement>(".card-issues");
      if (!note) continue;
      const texts = labels.get(item.dataset.paperId ?? "");
      if (texts && texts.length > 0) {
        item.classList.add("card--error");
        note.hidden = false;
        note.textContent = texts.join("; ");
      } else {
        item.classList.remove("card--error");
        note.hidden = true;
        note.textContent = "";
      }
    }
  }

  async refreshAgreement(): Promise<void> {
    const panel = this.root.querySelector("#agreement") as HTMLElement;
    const result = await this.api.getAgreement(this.detail.task_id);
    panel.hidden = false;
    panel.textContent = "";
    if (result.kind === "ok") {
      const rho = result.agreement.spearman;
      panel.appendChild(el("h2", undefined, "Agreement with the model ranking"));
      panel.appendChild(
        el(
          "p",
          "agreement-value",
          `Spearman ρ = ${rho.toFixed(3)} over ${result.agreement.n} references`,
        ),
      );
    } else if (result.kind === "unavailable") {
      panel.appendChild(el("p", "agreement-missing", result.detail));
    } else {
      panel.appendChild(
        el("p", "agreement-missing", `Agreement unavailable (${result.status}).`),
      );
    }
  }
}

// --- bootstrapping -----------------------------------------------------------

export async function showTask(
  root: HTMLElement,
  api: ApiClient,
  drafts: DraftStore,
  taskId: string,
  onBack?: () => void,
): Promise<TaskController> {
  const detail = await api.getTask(taskId);
  return new TaskController(root, detail, api, drafts, onBack);
}

export async function bootApp(
  root: HTMLElement,
  api: ApiClient,
  drafts: DraftStore,
): Promise<void> {
  const openList = async (): Promise<void> => {
    const tasks = await api.listTasks();
    renderTaskList(root, tasks, (taskId) => {
      window.location.hash = `#/task/${taskId}`;
      void openTask(taskId);
    });
  };
  const openTask = async (taskId: string): Promise<void> => {
    await showTask(root, api, drafts, taskId, () => {
      window.location.hash = "#/";
      void openList();
    });
  };
  const route = (): void => {
    const match = window.location.hash.match(/^#\/task\/(.+)$/);
    if (match) void openTask(decodeURIComponent(match[1]!));
    else void openList();
  };
  window.addEventListener("hashchange", route);
  route();
}
