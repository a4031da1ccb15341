// Conversation state is kept as plain data and every mutation goes
// through these pure functions, so replaying a recorded event log
// reproduces the same rendered transcript.

import type { SearchHit } from './api';

export interface ChatMessage {
  role: 'user' | 'assistant';
  text: string;
  hits?: SearchHit[];
  disclaimer?: string;
}

export interface ConversationState {
  sessionId: string | null;
  messages: ChatMessage[];
  pending: boolean;
  selectedLang: string;
  error: string | null;
  draft: string;
}

export function initialState(lang: string): ConversationState {
  return {
    sessionId: null,
    messages: [],
    pending: false,
    selectedLang: lang,
    error: null,
    draft: '',
  };
}

export type ChatEvent =
  | { type: 'session'; sessionId: string }
  | { type: 'submit'; text: string }
  | { type: 'answer'; text: string; hits: SearchHit[]; disclaimer: string }
  | { type: 'failure'; message: string }
  | { type: 'select-lang'; lang: string }
  | { type: 'edit-draft'; text: string };

export function reduce(state: ConversationState, event: ChatEvent): ConversationState {
  switch (event.type) {
    case 'session':
      return { ...state, sessionId: event.sessionId };
    case 'submit':
      // one in-flight ask at a time; a submit while pending is a no-op
      if (state.pending || !event.text.trim()) return state;
      return {
        ...state,
        pending: true,
        error: null,
        draft: '',
        messages: [...state.messages, { role: 'user', text: event.text }],
      };
    case 'answer':
      return {
        ...state,
        pending: false,
        messages: [
          ...state.messages,
          {
            role: 'assistant',
            text: event.text,
            hits: event.hits,
            disclaimer: event.disclaimer,
          },
        ],
      };
    case 'failure':
      // the failed question stays visible in the draft box for retry
      return {
        ...state,
        pending: false,
        error: event.message,
        draft: state.messages[state.messages.length - 1]?.text ?? '',
        messages: state.messages.slice(0, -1),
      };
    case 'select-lang':
      return { ...state, selectedLang: event.lang };
    case 'edit-draft':
      return { ...state, draft: event.text };
  }
}
