/** DOM wiring: token spans, suggestion panel, settings drawer, undo. */

import { ApiError, httpClient, SuggestClient } from "./api.js";
import {
  EditorState,
  acceptSuggestion,
  initialState,
  requestFailed,
  responseArrived,
  selectWord,
  setText,
  undo,
  updateSettings,
} from "./state.js";

const SAMPLE = "the results clearly indicate that our method outperforms the current state-of-the-art";

class Controller {
  state: EditorState;

  constructor(
    private client: SuggestClient,
    private root: HTMLElement,
  ) {
    this.state = initialState(SAMPLE.split(" "));
  }

  private transition(next: EditorState): void {
    this.state = next;
    this.render();
  }

  loadText(text: string): void {
    this.transition(setText(this.state, text));
  }

  async select(index: number): Promise<void> {
    const { state, request } = selectWord(this.state, index);
    this.transition(state);
    if (!request) return;
    try {
      const response = await this.client.suggest(
        request.tokens,
        request.target_index,
        request.k,
        request.filter_pos,
      );
      this.transition(responseArrived(this.state, request.seq, response));
    } catch (err) {
      const message =
        err instanceof ApiError ? `service rejected the request: ${err.reason}` : "service unreachable";
      this.transition(requestFailed(this.state, request.seq, message));
    }
  }

  accept(rank: number): void {
    this.transition(acceptSuggestion(this.state, rank));
  }

  undoLast(): void {
    this.transition(undo(this.state));
  }

  setK(k: number): void {
    this.transition(updateSettings(this.state, { k }));
  }

  setFilterPos(filterPos: boolean): void {
    this.transition(updateSettings(this.state, { filterPos }));
  }

  render(): void {
    const tokensEl = this.root.querySelector("#tokens")!;
    tokensEl.replaceChildren(
      ...this.state.tokens.map((word, i) => {
        const span = document.createElement("span");
        span.textContent = word;
        span.className = "token" + (i === this.state.selectedIndex ? " selected" : "");
        span.addEventListener("click", () => void this.select(i));
        return span;
      }),
    );

    const panel = this.root.querySelector("#suggestions")!;
    panel.replaceChildren();
    if (this.state.inflightSeq !== null) {
      panel.appendChild(line("status", "asking the model..."));
    } else if (this.state.pending) {
      if (this.state.pending.bypassed_pos_filter) {
        panel.appendChild(line("badge", "POS filter bypassed (word not in lexicon)"));
      }
      for (const s of this.state.pending.suggestions) {
        const row = document.createElement("div");
        row.className = "suggestion";
        const bar = document.createElement("div");
        bar.className = "prob-bar";
        bar.style.width = `${Math.max(2, Math.round(s.probability * 100))}%`;
        const label = document.createElement("span");
        label.textContent = `${s.rank}. ${s.word}  (${s.probability.toFixed(4)})`;
        row.append(label, bar);
        row.addEventListener("click", () => this.accept(s.rank));
        panel.appendChild(row);
      }
      if (this.state.pending.suggestions.length === 0) {
        panel.appendChild(line("status", "no candidates survived the filter"));
      }
    }

    const notice = this.root.querySelector("#notice")!;
    notice.textContent = this.state.notice ?? "";
    (notice as HTMLElement).style.display = this.state.notice ? "block" : "none";

    const undoBtn = this.root.querySelector("#undo") as HTMLButtonElement;
    undoBtn.disabled = this.state.history.length === 0;
  }
}

function line(cls: string, text: string): HTMLElement {
  const el = document.createElement("div");
  el.className = cls;
  el.textContent = text;
  return el;
}

function boot(): void {
  const root = document.body;
  const client = httpClient("");
  const controller = new Controller(client, root);

  (root.querySelector("#load") as HTMLButtonElement).addEventListener("click", () => {
    const input = root.querySelector("#text-input") as HTMLTextAreaElement;
    controller.loadText(input.value);
  });
  (root.querySelector("#undo") as HTMLButtonElement).addEventListener("click", () =>
    controller.undoLast(),
  );
  (root.querySelector("#k-input") as HTMLInputElement).addEventListener("change", (ev) => {
    const k = Number((ev.target as HTMLInputElement).value);
    if (Number.isInteger(k) && k >= 1 && k <= 100) controller.setK(k);
  });
  (root.querySelector("#filter-pos") as HTMLInputElement).addEventListener("change", (ev) => {
    controller.setFilterPos((ev.target as HTMLInputElement).checked);
  });

  client
    .health()
    .then((h) => {
      root.querySelector("#model-info")!.textContent =
        `model ${h.model} (${h.vocab_size} words)`;
    })
    .catch(() => {
      root.querySelector("#model-info")!.textContent = "service not ready";
    });

  controller.render();
}

document.addEventListener("DOMContentLoaded", boot);
