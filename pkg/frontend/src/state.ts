/**
 * Pure editor state machine.
 *
 * Every transition is a function of (state, event) returning a fresh
 * state, so the whole select -> render -> accept -> undo loop is testable
 * headlessly against a mocked service.  Responses carry the sequence
 * number of the request that produced them; anything but the latest
 * sequence number is stale and must leave the state untouched.
 */

export interface Suggestion {
  word: string;
  probability: number;
  rank: number;
}

export interface SuggestResponse {
  suggestions: Suggestion[];
  bypassed_pos_filter: boolean;
  model: string;
  latency_ms: number;
}

export interface Replacement {
  index: number;
  oldWord: string;
  newWord: string;
}

export interface SuggestRequest {
  seq: number;
  tokens: string[];
  target_index: number;
  k: number;
  filter_pos: boolean;
}

export interface EditorState {
  tokens: string[];
  selectedIndex: number | null;
  /** suggestions currently displayed, in exact response order */
  pending: SuggestResponse | null;
  /** sequence number of the request we are still waiting for */
  inflightSeq: number | null;
  /** word the in-flight/displayed request was issued for */
  requestedWord: string | null;
  history: Replacement[];
  notice: string | null;
  nextSeq: number;
  settings: { k: number; filterPos: boolean };
}

export function initialState(tokens: string[]): EditorState {
  return {
    tokens: [...tokens],
    selectedIndex: null,
    pending: null,
    inflightSeq: null,
    requestedWord: null,
    history: [],
    notice: null,
    nextSeq: 1,
    settings: { k: 10, filterPos: true },
  };
}

export function setText(state: EditorState, text: string): EditorState {
  return {
    ...initialState(text.split(/\s+/).filter((t) => t.length > 0)),
    settings: state.settings,
    nextSeq: state.nextSeq,
  };
}

export function updateSettings(
  state: EditorState,
  settings: Partial<EditorState["settings"]>,
): EditorState {
  return { ...state, settings: { ...state.settings, ...settings } };
}

/**
 * Click on a token: marks it selected and describes the request to send.
 * A newer selection supersedes any in-flight request simply by bumping
 * the sequence number.  Clicking outside the tokens returns no request.
 */
export function selectWord(
  state: EditorState,
  index: number | null,
): { state: EditorState; request: SuggestRequest | null } {
  if (index === null || index < 0 || index >= state.tokens.length) {
    return { state, request: null };
  }
  const seq = state.nextSeq;
  const request: SuggestRequest = {
    seq,
    tokens: [...state.tokens],
    target_index: index,
    k: state.settings.k,
    filter_pos: state.settings.filterPos,
  };
  return {
    state: {
      ...state,
      selectedIndex: index,
      pending: null,
      inflightSeq: seq,
      requestedWord: state.tokens[index],
      notice: null,
      nextSeq: seq + 1,
    },
    request,
  };
}

/** A response lands: ignored entirely unless it answers the newest request. */
export function responseArrived(
  state: EditorState,
  seq: number,
  response: SuggestResponse,
): EditorState {
  if (state.inflightSeq !== seq) {
    return state; // stale: superseded by a newer selection
  }
  return { ...state, pending: response, inflightSeq: null };
}

/** Network/service failure: non-blocking notice, editor content untouched. */
export function requestFailed(
  state: EditorState,
  seq: number,
  message: string,
): EditorState {
  if (state.inflightSeq !== seq) {
    return state;
  }
  return { ...state, inflightSeq: null, notice: message };
}

/** Accept the suggestion at the given 1-based rank. */
export function acceptSuggestion(state: EditorState, rank: number): EditorState {
  if (state.pending === null || state.selectedIndex === null) {
    return { ...state, notice: "no suggestions to accept" };
  }
  const idx = state.selectedIndex;
  if (state.requestedWord !== state.tokens[idx]) {
    // tokens changed since the request: the list no longer applies
    return {
      ...state,
      pending: null,
      selectedIndex: null,
      requestedWord: null,
      notice: "suggestions were stale and have been discarded",
    };
  }
  const chosen = state.pending.suggestions.find((s) => s.rank === rank);
  if (!chosen) {
    return { ...state, notice: `no suggestion at rank ${rank}` };
  }
  const tokens = [...state.tokens];
  const oldWord = tokens[idx];
  tokens[idx] = chosen.word;
  return {
    ...state,
    tokens,
    history: [...state.history, { index: idx, oldWord, newWord: chosen.word }],
    pending: null,
    selectedIndex: null,
    requestedWord: null,
    notice: null,
  };
}

/** Undo the most recent accepted replacement, restoring the exact token. */
export function undo(state: EditorState): EditorState {
  const last = state.history[state.history.length - 1];
  if (!last) {
    return { ...state, notice: "nothing to undo" };
  }
  const tokens = [...state.tokens];
  tokens[last.index] = last.oldWord;
  return {
    ...state,
    tokens,
    history: state.history.slice(0, -1),
    pending: null,
    selectedIndex: null,
    requestedWord: null,
    notice: null,
  };
}
