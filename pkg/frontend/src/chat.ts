// Chat panel: conversational ask loop, language selector, and a
// retrieved-sources inspection panel.  The DOM is rebuilt from state on
// every event; all text is set via textContent so server content can
// never be interpreted as markup.

import { ApiClient, ApiRequestError } from './api';
import { ChatEvent, ConversationState, initialState, reduce } from './state';

export const LANGUAGES = ['en', 'es', 'hi'];

export class ChatPanel {
  state: ConversationState;
  private expandedSources = new Set<number>();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    defaultLang = 'en',
  ) {
    this.state = initialState(defaultLang);
    this.render();
  }

  dispatch(event: ChatEvent): void {
    this.state = reduce(this.state, event);
    this.render();
  }

  async startSession(): Promise<void> {
    const { session_id } = await this.api.createSession();
    this.dispatch({ type: 'session', sessionId: session_id });
  }

  async sendQuestion(text: string, lang?: string): Promise<void> {
    if (this.state.pending || !text.trim()) return;
    const useLang = lang ?? this.state.selectedLang;
    this.dispatch({ type: 'submit', text });
    try {
      const response = await this.api.ask(
        text,
        useLang,
        this.state.sessionId ?? undefined,
      );
      this.dispatch({
        type: 'answer',
        text: response.answer,
        hits: response.hits,
        disclaimer: response.disclaimer,
      });
    } catch (err) {
      const message =
        err instanceof ApiRequestError
          ? err.body.message
          : 'network error, please retry';
      this.dispatch({ type: 'failure', message });
    }
  }

  toggleSources(messageIndex: number): void {
    if (this.expandedSources.has(messageIndex)) {
      this.expandedSources.delete(messageIndex);
    } else {
      this.expandedSources.add(messageIndex);
    }
    this.render();
  }

  private render(): void {
    this.root.textContent = '';

    const langSelect = document.createElement('select');
    langSelect.className = 'lang-select';
    for (const lang of LANGUAGES) {
      const option = document.createElement('option');
      option.value = lang;
      option.textContent = lang;
      option.selected = lang === this.state.selectedLang;
      langSelect.appendChild(option);
    }
    langSelect.addEventListener('change', () =>
      this.dispatch({ type: 'select-lang', lang: langSelect.value }),
    );
    this.root.appendChild(langSelect);

    const transcript = document.createElement('div');
    transcript.className = 'transcript';
    this.state.messages.forEach((message, i) => {
      const bubble = document.createElement('div');
      bubble.className = `bubble ${message.role}`;
      const body = document.createElement('p');
      body.textContent = message.text;
      bubble.appendChild(body);
      if (message.disclaimer) {
        const note = document.createElement('p');
        note.className = 'disclaimer';
        note.textContent = message.disclaimer;
        bubble.appendChild(note);
      }
      if (message.hits && message.hits.length > 0) {
        bubble.appendChild(this.renderSources(i, message.hits));
      }
      transcript.appendChild(bubble);
    });
    this.root.appendChild(transcript);

    if (this.state.error !== null) {
      const banner = document.createElement('div');
      banner.className = 'error-banner';
      banner.textContent = this.state.error;
      this.root.appendChild(banner);
    }

    const form = document.createElement('form');
    const input = document.createElement('input');
    input.className = 'question-input';
    input.value = this.state.draft;
    input.addEventListener('input', () =>
      this.dispatch({ type: 'edit-draft', text: input.value }),
    );
    const button = document.createElement('button');
    button.type = 'submit';
    button.textContent = this.state.pending ? 'Asking…' : 'Ask';
    button.disabled = this.state.pending;
    form.appendChild(input);
    form.appendChild(button);
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.sendQuestion(input.value);
    });
    this.root.appendChild(form);
  }

  private renderSources(messageIndex: number, hits: ChatMessage_Hits): HTMLElement {
    const panel = document.createElement('div');
    panel.className = 'sources';
    const toggle = document.createElement('button');
    toggle.type = 'button';
    toggle.className = 'sources-toggle';
    toggle.textContent = `Sources (${hits.length})`;
    toggle.addEventListener('click', () => this.toggleSources(messageIndex));
    panel.appendChild(toggle);
    if (this.expandedSources.has(messageIndex)) {
      const list = document.createElement('ol');
      for (const hit of hits) {
        const item = document.createElement('li');
        item.className = 'source-item';
        const score = document.createElement('span');
        score.className = 'source-score';
        score.textContent = hit.score.toFixed(3);
        const text = document.createElement('span');
        text.className = 'source-text';
        text.textContent = hit.text;
        item.appendChild(score);
        item.appendChild(text);
        list.appendChild(item);
      }
      panel.appendChild(list);
    }
    return panel;
  }
}

type ChatMessage_Hits = NonNullable<
  ConversationState['messages'][number]['hits']
>;
